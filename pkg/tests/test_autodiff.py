"""Tests for the autodiff core, checked against finite differences."""

import numpy as np
import pytest

from simpleclir.matching.autodiff import (
    ModelParams,
    Tensor,
    check_gradients,
    conv2d,
    dense,
    dynamic_pool,
    flatten,
    hinge,
    log_clamp,
    mul,
    pool_groups,
    relu,
    softmax,
    tanh,
    total,
)
from simpleclir.matching.features import PairFeatures
from simpleclir.matching.interaction import InteractionMatrix, build_histogram, kernel_pool
from simpleclir.matching.rankers import build_ranker
from simpleclir.models.config import MODEL_VARIANTS, InteractionKind, ModelConfig, ModelFamily


def random_matrix(rng, rows, cols):
    """Fully valid matrix of uniform cosine-like values."""
    values = rng.uniform(-1, 1, size=(rows, cols))
    return InteractionMatrix(values=values, valid_rows=np.ones(rows, dtype=bool), valid_cols=np.ones(cols, dtype=bool))


def test_elementwise_gradients():
    """dense, tanh, softmax and weighted sums."""
    rng = np.random.default_rng(0)
    params = ModelParams()
    x = params.add("x", rng.standard_normal(4))
    weight = params.add("weight", rng.standard_normal((4, 3)))
    bias = params.add("bias", rng.standard_normal(3))
    target = Tensor(rng.standard_normal(3))

    def loss():
        return total(mul(softmax(tanh(dense(x, weight, bias))), target))

    assert check_gradients(loss, params, skip_kinks=False) == params.size


def test_batched_dense_and_log_clamp_gradients():
    """Batched dense rows and the clamped log."""
    rng = np.random.default_rng(1)
    params = ModelParams()
    x = params.add("x", rng.uniform(0.5, 2.0, size=(3, 4)))
    weight = params.add("weight", rng.standard_normal((4, 2)))
    bias = params.add("bias", np.zeros(2))

    def loss():
        return total(mul(log_clamp(x), 0.5)) + total(dense(x, weight, bias))

    assert check_gradients(loss, params, skip_kinks=False) == params.size


def test_conv_pool_gradients():
    """conv2d, relu and dynamic pooling, including the input gradient."""
    rng = np.random.default_rng(2)
    params = ModelParams()
    x = params.add("x", rng.uniform(-1, 1, size=(4, 6)))
    kernels = params.add("kernels", rng.standard_normal((2, 3, 3)))
    bias = params.add("bias", rng.standard_normal(2))
    weights = Tensor(rng.standard_normal(2 * 5 * 2))

    def loss():
        pooled = dynamic_pool(relu(conv2d(x, kernels, bias)), rows=5, cols=2)
        return total(mul(flatten(pooled), weights))

    assert check_gradients(loss, params) > params.size // 2
def ranker_pair(rng, config, doc_id, rows, cols):
    """Features of one random pair in the form the configuration's ranker reads."""
    cosine = random_matrix(rng, rows, cols)
    if config.family == ModelFamily.DRMM:
        return PairFeatures(
            query_id="q",
            doc_id=doc_id,
            histogram=build_histogram(cosine, config.histogram_bins),
            gate_idf=np.linspace(0.5, 2.5, rows),
        )
    if config.family == ModelFamily.KNRM:
        return PairFeatures(query_id="q", doc_id=doc_id, kernels=kernel_pool(cosine, config.mus))
    exact = InteractionMatrix(
        kind="indicator",
        eta=0.3,
        values=(cosine.values >= 0.3).astype(float),
        valid_rows=cosine.valid_rows,
        valid_cols=cosine.valid_cols,
    )
    if config.interaction == InteractionKind.HYBRID:
        return PairFeatures(query_id="q", doc_id=doc_id, matrices=(cosine, exact))
    if config.interaction == InteractionKind.INDICATOR:
        return PairFeatures(query_id="q", doc_id=doc_id, matrices=(exact,))
    if config.interaction == InteractionKind.GAUSSIAN:
        gaussian = InteractionMatrix(
            kind="gaussian",
            values=np.exp(-((1.0 - cosine.values) ** 2)),
            valid_rows=cosine.valid_rows,
            valid_cols=cosine.valid_cols,
        )
        return PairFeatures(query_id="q", doc_id=doc_id, matrices=(gaussian,))
    return PairFeatures(query_id="q", doc_id=doc_id, matrices=(cosine,))


def hinge_of(ranker, positive, negative):
    return lambda: hinge(ranker.forward(positive), ranker.forward(negative), margin=10.0)


@pytest.mark.parametrize("variant", MODEL_VARIANTS)
def test_ranker_hinge_gradients_small(variant):
    """Every ranker's parameter gradients under an active hinge loss, on narrow layers."""
    rng = np.random.default_rng(3)
    config = ModelConfig.from_variant(variant, conv_channels=2, mp_hidden=3, drmm_hidden=3, seed=7)
    ranker = build_ranker(config)
    positive, negative = ranker_pair(rng, config, "pos", 3, 7), ranker_pair(rng, config, "neg", 3, 7)
    assert check_gradients(hinge_of(ranker, positive, negative), ranker.params) > 0


@pytest.mark.slow
@pytest.mark.parametrize("variant", MODEL_VARIANTS)
def test_ranker_hinge_gradients_full_size(variant):
    """Default architectures on a 4 x 20 pair: at least 99% of the entries lie off a kink and agree."""
    rng = np.random.default_rng(11)
    config = ModelConfig.from_variant(variant)
    ranker = build_ranker(config)
    positive, negative = ranker_pair(rng, config, "pos", 4, 20), ranker_pair(rng, config, "neg", 4, 20)
    checked = check_gradients(hinge_of(ranker, positive, negative), ranker.params)
    assert checked >= 0.99 * ranker.params.size


def test_check_gradients_reports_mismatch():
    """A wrong backward rule is caught."""
    params = ModelParams()
    x = params.add("x", np.array([2.0, -1.5]))

    def loss():
        out = total(mul(x, x))
        out._backward = lambda g: x.accumulate(np.full(2, 1.0))
        return out

    with pytest.raises(ValueError, match=r"Gradient mismatch at x\[0\]"):
        check_gradients(loss, params, skip_kinks=False)


def test_backward_accumulates_and_reuses_nodes():
    """A tensor used twice gets both contributions; a second backward adds up."""
    x = Tensor(np.array([3.0]), requires_grad=True)
    total(mul(x, x)).backward()
    np.testing.assert_allclose(x.grad, [6.0])
    total(mul(x, 2.0)).backward()
    np.testing.assert_allclose(x.grad, [8.0])
    x.zero_grad()
    assert x.grad is None


def test_backward_requires_scalar():
    """Only a single-value tensor starts a backward pass."""
    with pytest.raises(ValueError, match="scalar"):
        Tensor(np.ones(2), requires_grad=True).backward()


def test_constants_build_no_graph():
    """Operations on constants record nothing to differentiate."""
    out = total(mul(Tensor(np.ones(3)), 2.0))
    assert not out.requires_grad
    assert out.item() == 6.0


def test_relu_and_log_clamp_values():
    """relu passes no gradient at 0; the clamped log is flat below its floor."""
    x = Tensor(np.array([-1.0, 0.0, 2.0]), requires_grad=True)
    total(relu(x)).backward()
    np.testing.assert_array_equal(x.grad, [0.0, 0.0, 1.0])

    y = Tensor(np.array([0.0, np.e]), requires_grad=True)
    clamped = log_clamp(y, floor=1e-10)
    np.testing.assert_allclose(clamped.values, [np.log(1e-10), 1.0])
    total(clamped).backward()
    np.testing.assert_allclose(y.grad, [0.0, 1.0 / np.e])
    with pytest.raises(ValueError, match="floor"):
        log_clamp(y, floor=0.0)


def test_hinge_values():
    """max(0, 1 - s_pos + s_neg)."""
    assert hinge(2.0, 0.0).item() == 0.0
    assert hinge(0.0, 0.0).item() == 1.0
    assert hinge(0.3, 0.5).item() == pytest.approx(1.2)


def test_hinge_kink_has_zero_gradient():
    """At the kink the hinge is treated as inactive."""
    s_pos = Tensor(1.0, requires_grad=True)
    s_neg = Tensor(0.0, requires_grad=True)
    hinge(s_pos, s_neg).backward()
    assert s_pos.grad == 0.0
    assert s_neg.grad == 0.0


def test_conv2d_identity_kernel():
    """A centered one-hot kernel returns the input unchanged (same-size output)."""
    x = np.arange(12, dtype=float).reshape(3, 4)
    kernel = np.zeros((1, 3, 3))
    kernel[0, 1, 1] = 1.0
    out = conv2d(Tensor(x), Tensor(kernel), Tensor(np.zeros(1)))
    assert out.shape == (1, 3, 4)
    np.testing.assert_array_equal(out.values[0], x)
    with pytest.raises(ValueError, match="odd square"):
        conv2d(Tensor(x), Tensor(np.zeros((1, 2, 2))), Tensor(np.zeros(1)))


def test_pool_groups():
    """Near-equal spans; short inputs repeat rows."""
    assert pool_groups(10, 5) == [(0, 2), (2, 4), (4, 6), (6, 8), (8, 10)]
    assert pool_groups(3, 5) == [(0, 1), (0, 1), (1, 2), (1, 2), (2, 3)]
    assert pool_groups(1, 5) == [(0, 1)] * 5
    with pytest.raises(ValueError):
        pool_groups(0, 5)


def test_dynamic_pool_fixed_output():
    """Any input height maps onto the same grid."""
    for height in (1, 3, 8):
        x = Tensor(np.arange(2 * height * 4, dtype=float).reshape(2, height, 4))
        out = dynamic_pool(x, rows=5, cols=1)
        assert out.shape == (2, 5, 1)
        assert out.values[0, -1, 0] == x.values[0, -1, -1]


def test_dynamic_pool_row_mask():
    """Masked rows never win a cell, wherever they sit, and get no gradient."""
    x = Tensor(np.array([[[1.0], [9.0], [2.0], [7.0]]]), requires_grad=True)
    mask = np.array([True, False, True, False])
    out = dynamic_pool(x, rows=2, cols=1, row_mask=mask)
    assert out.values.ravel().tolist() == [1.0, 2.0]
    total(out).backward()
    assert x.grad.ravel().tolist() == [1.0, 0.0, 1.0, 0.0]
    assert dynamic_pool(x, rows=1, cols=1).values.ravel().tolist() == [9.0]


def test_dynamic_pool_row_mask_errors():
    """Masks of the wrong shape or keeping nothing are rejected."""
    x = Tensor(np.ones((1, 3, 2)))
    with pytest.raises(ValueError, match="row_mask must have shape"):
        dynamic_pool(x, row_mask=np.ones(4, dtype=bool))
    with pytest.raises(ValueError, match="keeps no rows"):
        dynamic_pool(x, row_mask=np.zeros(3, dtype=bool))


def test_model_params():
    """Named, ordered parameters with checked state loading."""
    params = ModelParams()
    params.add("w", np.ones((2, 2)))
    params.add("b", np.zeros(2))
    assert list(params) == ["w", "b"]
    assert params.size == 6
    with pytest.raises(ValueError, match="Duplicate"):
        params.add("w", np.ones(1))
    with pytest.raises(ValueError, match="do not match"):
        params.load_state({"w": np.ones((2, 2))})
    with pytest.raises(ValueError, match="Shape mismatch"):
        params.load_state({"w": np.ones(3), "b": np.zeros(2)})
    state = params.state()
    state["w"][0, 0] = 5.0
    assert params["w"].values[0, 0] == 1.0
    params.load_state(state)
    assert params["w"].values[0, 0] == 5.0
    assert params.grads()["b"].tolist() == [0.0, 0.0]
