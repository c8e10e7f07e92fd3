"""Interaction-based neural rankers built on the autodiff core.

Every ranker owns a ``ModelParams`` set initialized from its configuration seed and
maps ``PairFeatures`` to a scalar score tensor.
"""

from abc import ABC, abstractmethod

import numpy as np

from simpleclir.matching.autodiff import (
    ModelParams,
    Tensor,
    concat,
    conv2d,
    dense,
    dynamic_pool,
    flatten,
    log_clamp,
    mul,
    relu,
    reshape,
    softmax,
    tanh,
    total,
)
from simpleclir.matching.features import PairFeatures
from simpleclir.matching.interaction import InteractionMatrix
from simpleclir.models.config import InteractionKind, ModelConfig, ModelFamily


class Ranker(ABC):
    """Base class of the neural rankers."""

    family: ModelFamily

    def __init__(self, config: ModelConfig):
        if config.family != self.family:
            raise ValueError(f"{type(self).__name__} cannot be built from a {config.family.value} configuration")
        self.config = config
        self.params = ModelParams()
        self._rng = np.random.default_rng(config.seed)
        self._build()

    def __repr__(self) -> str:
        return f"{type(self).__name__}(variant={self.config.variant!r}, parameters={self.params.size})"

    def _uniform(self, name: str, shape: tuple[int, ...], fan_in: int) -> Tensor:
        """Fan-in scaled uniform weights, U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
        bound = 1.0 / np.sqrt(fan_in)
        return self.params.add(name, self._rng.uniform(-bound, bound, size=shape))

    def _zeros(self, name: str, shape: tuple[int, ...]) -> Tensor:
        return self.params.add(name, np.zeros(shape))

    @abstractmethod
    def _build(self) -> None:
        """Create the parameters in a fixed order."""

    @abstractmethod
    def forward(self, features: PairFeatures) -> Tensor:
        """Score tensor (0-d) of one pair."""

    def score(self, features: PairFeatures) -> float:
        return self.forward(features).item()


class MatchPyramid(Ranker):
    """One convolution tower over a single interaction matrix.

    matrix -> conv(3x3) -> relu -> dynamic pool(5x1) -> dense -> relu -> dense.
    Rows are fitted to ``query_max_len``; padded and OOV rows are left out of pooling.
    Degenerate matrices score 0.
    """

    family = ModelFamily.MP
    towers: tuple[str, ...] = ("tower",)

    def _build(self) -> None:
        config = self.config
        k = config.conv_kernel_size
        for tower in self.towers:
            self._uniform(f"{tower}.conv.kernel", (config.conv_channels, k, k), k * k)
            self._zeros(f"{tower}.conv.bias", (config.conv_channels,))
        pooled = len(self.towers) * config.conv_channels * config.pool_rows * config.pool_cols
        self._uniform("hidden.weight", (pooled, config.mp_hidden), pooled)
        self._zeros("hidden.bias", (config.mp_hidden,))
        self._uniform("out.weight", (config.mp_hidden, 1), config.mp_hidden)
        self._zeros("out.bias", (1,))

    def tower(self, name: str, matrix: InteractionMatrix | np.ndarray) -> Tensor:
        """Flattened pooled features of one matrix, padded or truncated to ``query_max_len`` rows."""
        if isinstance(matrix, InteractionMatrix):
            values, row_mask = matrix.values, matrix.valid_rows
        else:
            values = np.asarray(matrix, dtype=np.float64)
            row_mask = np.ones(values.shape[0], dtype=bool)
        values, row_mask = self.fit_rows(values, row_mask)
        if not row_mask.any():
            config = self.config
            return Tensor(np.zeros(config.conv_channels * config.pool_rows * config.pool_cols))
        return self.tower_from(name, Tensor(values), row_mask)

    def fit_rows(self, values: np.ndarray, row_mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Truncate to ``query_max_len`` rows or pad with zero rows that are masked out."""
        length = self.config.query_max_len
        values, row_mask = values[:length], np.asarray(row_mask[:length], dtype=bool)
        missing = length - values.shape[0]
        if missing > 0:
            values = np.vstack([values, np.zeros((missing, values.shape[1]))])
            row_mask = np.concatenate([row_mask, np.zeros(missing, dtype=bool)])
        return values, row_mask

    def tower_from(self, name: str, x: Tensor, row_mask: np.ndarray | None = None) -> Tensor:
        conv = conv2d(x, self.params[f"{name}.conv.kernel"], self.params[f"{name}.conv.bias"])
        pooled = dynamic_pool(relu(conv), self.config.pool_rows, self.config.pool_cols, row_mask=row_mask)
        return flatten(pooled)

    def head(self, features: Tensor) -> Tensor:
        hidden = relu(dense(features, self.params["hidden.weight"], self.params["hidden.bias"]))
        return reshape(dense(hidden, self.params["out.weight"], self.params["out.bias"]), ())

    def forward(self, features: PairFeatures) -> Tensor:
        if features.degenerate:
            return Tensor(0.0)
        return self.head(self.tower("tower", features.matrices[0]))


class MatchPyramidHybrid(MatchPyramid):
    """Unshared cosine and indicator towers, concatenated before the head."""

    towers = ("cosine", "indicator")

    def forward(self, features: PairFeatures) -> Tensor:
        if features.degenerate:
            return Tensor(0.0)
        if len(features.matrices) != 2:
            raise ValueError("The hybrid model needs a cosine and an indicator matrix")
        cosine, exact = features.matrices
        return self.head(concat([self.tower("cosine", cosine), self.tower("indicator", exact)]))


class DRMM(Ranker):
    """Per-term feed-forward scores over matching histograms, combined by idf gating.

    z_i = dense(tanh(dense(h_i))), g = softmax(w_g * idf), score = sum_i g_i z_i.
    Query terms without a vector are left out; an all-OOV query scores 0.
    """

    family = ModelFamily.DRMM

    def _build(self) -> None:
        bins, hidden = self.config.histogram_bins, self.config.drmm_hidden
        self._uniform("ffn.hidden.weight", (bins, hidden), bins)
        self._zeros("ffn.hidden.bias", (hidden,))
        self._uniform("ffn.out.weight", (hidden, 1), hidden)
        self._zeros("ffn.out.bias", (1,))
        self._uniform("gate.weight", (1,), 1)

    def gates(self, idf: np.ndarray) -> Tensor:
        return softmax(mul(Tensor(idf), self.params["gate.weight"]))

    def forward(self, features: PairFeatures) -> Tensor:
        if features.histogram is None or features.gate_idf is None:
            raise ValueError("DRMM needs histogram features and gate idf")
        valid = features.histogram.valid_rows
        if not valid.any():
            return Tensor(0.0)
        histogram = Tensor(features.histogram.values[valid])
        hidden = tanh(dense(histogram, self.params["ffn.hidden.weight"], self.params["ffn.hidden.bias"]))
        term_scores = dense(hidden, self.params["ffn.out.weight"], self.params["ffn.out.bias"])
        term_scores = reshape(term_scores, (int(valid.sum()),))
        return total(mul(self.gates(features.gate_idf[valid]), term_scores))


class KNRM(Ranker):
    """tanh(w . phi + b) with phi_k = sum_i ln(max(K_ik, floor)) over embedded query terms.

    Combination weights are fan-in uniform with a zero bias; the embedding layer is frozen,
    so kernel features are constants.
    """

    family = ModelFamily.KNRM

    def _build(self) -> None:
        self._uniform("combine.weight", (self.config.kernel_count, 1), self.config.kernel_count)
        self._zeros("combine.bias", (1,))

    def features(self, features: PairFeatures) -> Tensor:
        """phi, the soft-TF vector; zero when the pair is degenerate."""
        if features.kernels is None:
            raise ValueError("KNRM needs kernel features")
        valid = features.kernels.valid_rows
        if features.degenerate or not valid.any():
            return Tensor(np.zeros(self.config.kernel_count))
        return total(log_clamp(Tensor(features.kernels.values[valid]), self.config.kernel_floor), axis=0)

    def forward(self, features: PairFeatures) -> Tensor:
        phi = self.features(features)
        return reshape(tanh(dense(phi, self.params["combine.weight"], self.params["combine.bias"])), ())


def build_ranker(config: ModelConfig) -> Ranker:
    """Instantiate the ranker of a configuration's family."""
    if config.family == ModelFamily.MP:
        if config.interaction == InteractionKind.HYBRID:
            return MatchPyramidHybrid(config)
        return MatchPyramid(config)
    if config.family == ModelFamily.DRMM:
        return DRMM(config)
    return KNRM(config)
