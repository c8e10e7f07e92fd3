"""Cross-lingual retrieval with word embeddings: unsupervised baselines and neural rankers."""

from simpleclir.utils.logging import logger

__version__ = "0.1.0"

__all__ = ["__version__", "logger"]
