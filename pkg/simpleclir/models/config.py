"""Model, training and experiment configuration."""

import os
from enum import Enum
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, Field, computed_field, model_validator

from simpleclir.models.io import PACKAGE_DATA, resolve_path

PRESET_DIR = PACKAGE_DATA / "presets"


class ModelFamily(str, Enum):
    """Neural matching model families."""

    MP = "MP"
    DRMM = "DRMM"
    KNRM = "KNRM"


class InteractionKind(str, Enum):
    """Interaction functions between a query term and a document term."""

    COSINE = "cosine"
    GAUSSIAN = "gaussian"
    INDICATOR = "indicator"
    # MP only: cosine and indicator channels side by side
    HYBRID = "hybrid"


_VARIANT_KINDS = {
    "Cosine": InteractionKind.COSINE,
    "Gaussian": InteractionKind.GAUSSIAN,
    "Exact": InteractionKind.INDICATOR,
    "Hybrid": InteractionKind.HYBRID,
}

MODEL_VARIANTS = [
    "MP-Cosine",
    "MP-Gaussian",
    "MP-Exact",
    "MP-Hybrid",
    "MP-TbT-QT",
    "DRMM-Cosine",
    "DRMM-TbT-QT",
    "KNRM-Cosine",
    "KNRM-TbT-QT",
]

BASELINES = ["BWE-Agg-Add", "BWE-Agg-IDF", "TbT-QT-QL", "TbT-QT-BM25"]


def default_kernel_mus(kernel_count: int = 20) -> list[float]:
    """Evenly spaced kernel centers over [-1, 1]: -1 + (2k - 1) / K for k = 1..K."""
    return [-1.0 + (2 * k - 1) / kernel_count for k in range(1, kernel_count + 1)]


class ModelConfig(BaseModel):
    """Architecture of a neural matching model.

    Defaults are the published hyper-parameters; head widths, query length and
    seeds are local choices.
    """

    family: ModelFamily = Field(ModelFamily.MP, description="Model family")
    interaction: InteractionKind = Field(InteractionKind.COSINE, description="Interaction function (MP only)")
    translate_query: bool = Field(False, description="Translate the query term by term before matching (TbT-QT)")
    eta: float = Field(0.3, ge=-1.0, le=1.0, description="Exact-match cosine threshold")

    conv_kernel_size: int = Field(3, gt=0, description="Square convolution kernel size")
    conv_channels: int = Field(64, gt=0, description="Number of convolution kernels")
    pool_rows: int = Field(5, gt=0, description="Dynamic pooling output rows (query side)")
    pool_cols: int = Field(1, gt=0, description="Dynamic pooling output columns (document side)")
    mp_hidden: int = Field(32, gt=0, description="Hidden width of the MP scoring head")

    histogram_bins: int = Field(30, ge=2, description="DRMM matching-histogram bins over [-1, 1]")
    drmm_hidden: int = Field(5, gt=0, description="Hidden width of the DRMM term network")

    kernel_count: int = Field(20, gt=0, description="KNRM Gaussian kernels")
    kernel_sigma: float = Field(0.1, gt=0.0, description="Standard deviation of every KNRM kernel")
    kernel_mus: list[float] | None = Field(None, description="Kernel centers; even grid when omitted")
    kernel_floor: float = Field(1e-10, gt=0.0, description="Floor applied before the log of kernel mass")

    query_max_len: int = Field(8, gt=0, description="Query terms kept (longer queries are truncated)")
    seed: int = Field(42, description="Seed of the parameter initialization")

    @model_validator(mode="after")
    def validate_family(self) -> "ModelConfig":
        """Only MP supports non-cosine interactions; kernel centers match the kernel count."""
        if self.family != ModelFamily.MP and self.interaction != InteractionKind.COSINE:
            raise ValueError(f"{self.family.value} only supports cosine interactions")
        if self.translate_query and self.interaction != InteractionKind.COSINE:
            raise ValueError("TbT-QT variants use cosine interactions")
        if self.kernel_mus is not None and len(self.kernel_mus) != self.kernel_count:
            raise ValueError("kernel_mus must have kernel_count entries")
        return self

    @property
    def mus(self) -> list[float]:
        return self.kernel_mus if self.kernel_mus is not None else default_kernel_mus(self.kernel_count)

    @computed_field
    @property
    def variant(self) -> str:
        """Display name, e.g. ``MP-Exact`` or ``DRMM-TbT-QT``."""
        if self.translate_query:
            return f"{self.family.value}-TbT-QT"
        suffix = {v: k for k, v in _VARIANT_KINDS.items()}[self.interaction]
        return f"{self.family.value}-{suffix}"

    @classmethod
    def from_variant(cls, name: str, **overrides: Any) -> "ModelConfig":
        """Build the configuration of a named variant (see ``MODEL_VARIANTS``)."""
        family, _, rest = name.partition("-")
        try:
            family_enum = ModelFamily(family.upper())
        except ValueError:
            raise ValueError(f"Unknown model variant '{name}'. Available: {MODEL_VARIANTS}") from None
        if rest.lower() == "tbt-qt":
            return cls(family=family_enum, translate_query=True, **overrides)
        matches = [kind for label, kind in _VARIANT_KINDS.items() if label.lower() == rest.lower()]
        if not matches:
            raise ValueError(f"Unknown model variant '{name}'. Available: {MODEL_VARIANTS}")
        return cls(family=family_enum, interaction=matches[0], **overrides)


class TrainConfig(BaseModel):
    """Pairwise hinge-loss training with Adam."""

    learning_rate: float = Field(1e-3, gt=0.0)
    batch_size: int = Field(64, gt=0)
    neg_per_pos: int = Field(5, gt=0, description="Negative documents sampled per relevant document")
    max_epochs: int = Field(20, gt=0)
    margin: float = Field(1.0, gt=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    epsilon: float = Field(1e-8, gt=0.0)
    seed: int = Field(42, description="Seed of negative sampling and batch order")


class ExperimentConfig(BaseModel):
    """Inputs and settings of an experiment run; loadable from YAML presets."""

    name: str = Field("experiment", description="Tag written into run files")
    collection: str | None = Field(None, description="Target-language collection (docId<TAB>text)")
    queries: str | None = Field(None, description="Source-language queries (queryId<TAB>title)")
    qrels: str | None = Field(None, description="TREC qrels")
    embeddings: list[str] = Field(default_factory=list, description="Aligned vector files in word2vec text format")
    source_lang: str = Field("en")
    target_lang: str = Field("es")
    query_stopwords: str | None = Field("en", description="Shipped language code or stopword file")
    doc_stopwords: str | None = Field("es", description="Shipped language code or stopword file")
    restrict_embeddings: bool = Field(True, description="Only keep vectors of collection and query terms")

    truncation_limit: int = Field(500, gt=0)
    truncate_after_stopwords: bool = Field(True)

    mu: float = Field(1000.0, gt=0.0, description="Dirichlet prior of query likelihood")
    k1: float = Field(1.2, gt=0.0)
    b: float = Field(0.75, ge=0.0, le=1.0)

    candidate_pool: Literal["judged", "bm25"] = Field("judged", description="Documents reranked per query")
    pool_depth: int = Field(1000, gt=0, description="First-stage depth of the bm25 pool")

    variants: list[str] = Field(default_factory=lambda: list(MODEL_VARIANTS))
    baselines: list[str] = Field(default_factory=lambda: list(BASELINES))
    folds: int = Field(5, ge=3, description="Cross-validation folds (train on k - 2, validate on 1, test on 1)")
    seed: int = Field(42)
    alpha: float = Field(0.05, gt=0.0, lt=1.0, description="Significance level of the paired t-test")

    pair_cap: int = Field(10_000_000, gt=0, description="Maximum word pairs in a similarity distribution")
    distribution_bins: int = Field(100, gt=1)
    etas: list[float] = Field(default_factory=lambda: [round(0.05 * i, 2) for i in range(21)])

    model: ModelConfig = Field(default_factory=ModelConfig, description="Shared overrides for every variant")
    train: TrainConfig = Field(default_factory=TrainConfig)
    output_dir: str = Field("runs")

    @model_validator(mode="after")
    def validate_names(self) -> "ExperimentConfig":
        """Variant and baseline names must be known."""
        for name in self.variants:
            ModelConfig.from_variant(name)
        unknown = [b for b in self.baselines if b not in BASELINES]
        if unknown:
            raise ValueError(f"Unknown baselines {unknown}. Available: {BASELINES}")
        return self

    def model_config_for(self, variant: str) -> ModelConfig:
        """Variant configuration with the shared architecture overrides applied."""
        shared = self.model.model_dump(exclude={"family", "interaction", "translate_query", "variant"})
        return ModelConfig.from_variant(variant, **shared)

    def resolved(self, field: str) -> Path | None:
        value = getattr(self, field)
        return None if value is None else resolve_path(value)

    @classmethod
    def from_yaml(cls, path: str | os.PathLike[str]) -> "ExperimentConfig":
        """Load a YAML configuration file; relative data paths are kept as written."""
        with open(resolve_path(path), encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        return cls.model_validate(data)

    @classmethod
    def from_preset(cls, name: str) -> "ExperimentConfig":
        path = PRESET_DIR / f"{name}.yaml"
        if not path.exists():
            available = sorted(p.stem for p in PRESET_DIR.glob("*.yaml"))
            raise ValueError(f"Unknown preset '{name}'. Available: {available}")
        return cls.from_yaml(path)

    def to_yaml(self, path: str | os.PathLike[str]) -> None:
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.model_dump(mode="json", exclude_none=True), f, sort_keys=False)
