"""Text-mining toolkit for incident-description corpora.

Modules: ``corpus`` (loading, tokenization, transactions), ``rules``
(positive/negative association-rule mining with an IDF band), ``vectors``
(sparse TF-IDF), ``clustering`` (PAM k-medoids, silhouette sweeps,
incremental PCA over external embeddings), ``langmodel`` (BiLSTM consequence
predictor) and ``cli`` (the pipeline entry point).
"""

__version__ = "0.1.0"

from .errors import IncmineError

__all__ = ["IncmineError", "__version__"]
