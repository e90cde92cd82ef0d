"""K-medoids (PAM) clustering, silhouette-driven k sweeps and incremental PCA.

PAM runs on a precomputed distance matrix: greedy BUILD, then repeated
single-best SWAP passes. All ties break to the lowest index, which makes the
result independent of the seed; the seed is only echoed into reports.

Incremental PCA consumes externally produced sentence-embedding matrices in
batches, keeping every principal direction up to the data rank seen so far,
so at desk scale it reproduces batch PCA exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import IncmineError

METRICS = ("euclidean", "cosine")

# cap on the scratch buffer used by chunked exact euclidean distances
_CHUNK_BUDGET = 16_000_000


class ClusteringError(IncmineError):
    pass


class EmbeddingFormatError(IncmineError):
    pass


@dataclass(frozen=True)
class EmbeddingMatrix:
    values: np.ndarray  # (n_rows, n_cols) float64, row-major

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if values.ndim != 2:
            raise ClusteringError("embedding matrix must be 2-D")
        if not np.isfinite(values).all():
            raise EmbeddingFormatError("embedding matrix contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ClusterConfig:
    k: Optional[int] = None
    sweep: Optional[tuple[int, int]] = None
    metric: str = "euclidean"
    max_iter: int = 100
    seed: int = 0

    def __post_init__(self):
        if (self.k is None) == (self.sweep is None):
            raise ValueError("exactly one of k or sweep must be given")
        if self.k is not None and self.k < 2:
            raise ValueError("k must be >= 2")
        if self.sweep is not None:
            lo, hi = self.sweep
            if lo < 2 or lo > hi:
                raise ValueError("sweep range must satisfy 2 <= k_lo <= k_hi")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")


@dataclass(frozen=True)
class ClusterAssignment:
    medoids: tuple[int, ...]
    labels: np.ndarray
    cost: float
    silhouette: float


@dataclass(frozen=True)
class SweepReport:
    entries: tuple[tuple[int, float, float], ...]  # (k, cost, silhouette)
    truncated: bool = False


@dataclass(frozen=True)
class IpcaModel:
    mean: np.ndarray
    components: np.ndarray                # (m, n_cols) orthonormal rows
    singular_values: np.ndarray
    explained_variance_ratio: np.ndarray  # non-increasing, sums to <= 1
    n_seen: int

    @property
    def n_cols(self) -> int:
        return self.components.shape[1]


def _validate_points(points) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2:
        raise ClusteringError("points must form a 2-D matrix")
    if not np.isfinite(points).all():
        raise ClusteringError("points contain non-finite values")
    return points


def pairwise_distances(points, metric: str = "euclidean") -> np.ndarray:
    """Full symmetric distance matrix.

    Euclidean distances are computed from explicit row differences (chunked),
    not the expanded-dot-product identity, so identical rows give exactly 0.
    """
    points = _validate_points(points)
    n = points.shape[0]
    if metric == "euclidean":
        d = np.empty((n, n))
        step = max(1, _CHUNK_BUDGET // max(1, n * points.shape[1]))
        for start in range(0, n, step):
            stop = min(n, start + step)
            diff = points[start:stop, None, :] - points[None, :, :]
            d[start:stop] = np.sqrt((diff * diff).sum(axis=2))
    elif metric == "cosine":
        norms = np.linalg.norm(points, axis=1)
        safe = np.where(norms > 0.0, norms, 1.0)
        unit = points / safe[:, None]
        sim = np.clip(unit @ unit.T, -1.0, 1.0)
        zero = norms == 0.0
        if zero.any():
            sim[zero, :] = 0.0
            sim[:, zero] = 0.0
            sim[np.ix_(zero, zero)] = 1.0  # two zero rows are identical points
        d = 1.0 - sim
    else:
        raise ValueError(f"metric must be one of {METRICS}")
    d = (d + d.T) * 0.5
    np.fill_diagonal(d, 0.0)
    return d


def kmedoids_fit(points, config: ClusterConfig,
                 dist: Optional[np.ndarray] = None) -> ClusterAssignment:
    """PAM on the given points; ``dist`` may be passed to reuse a matrix."""
    points = _validate_points(points)
    k = config.k
    if k is None:
        raise ValueError("kmedoids_fit needs a fixed k; use sweep_k for ranges")
    n = points.shape[0]
    if k > n:
        raise ClusteringError(f"k={k} exceeds number of points n={n}")
    if dist is None:
        dist = pairwise_distances(points, config.metric)
    medoids = _kernels.pam_build(dist, k)
    medoids, _ = _kernels.pam_swap(dist, medoids, config.max_iter)
    medoids = np.sort(medoids)
    labels, d_near = _kernels.assign_to_medoids(dist, medoids)
    cost = float(d_near.sum())
    sil = float(_kernels.silhouette_samples_from_dist(dist, labels, k).mean())
    return ClusterAssignment(medoids=tuple(int(m) for m in medoids),
                             labels=labels, cost=cost, silhouette=sil)


def silhouette(points, labels, metric: str = "euclidean") -> float:
    """Mean silhouette; singleton clusters and degenerate geometry score 0."""
    points = _validate_points(points)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != points.shape[0]:
        raise ClusteringError("labels length must match points")
    distinct = np.unique(labels)
    if len(distinct) < 2:
        raise ClusteringError("silhouette needs at least 2 clusters")
    k = int(labels.max()) + 1
    dist = pairwise_distances(points, metric)
    return float(_kernels.silhouette_samples_from_dist(dist, labels, k).mean())


def sweep_k(points, k_lo: int, k_hi: int, metric: str = "euclidean",
            seed: int = 0, max_iter: int = 100) -> tuple[ClusterAssignment, SweepReport]:
    """Fit every k in [k_lo, min(k_hi, n)]; best = max silhouette, ties to smaller k."""
    points = _validate_points(points)
    n = points.shape[0]
    if k_lo < 2 or k_lo > k_hi:
        raise ValueError("sweep range must satisfy 2 <= k_lo <= k_hi")
    truncated = k_hi > n
    k_hi = min(k_hi, n)
    if k_lo > k_hi:
        raise ClusteringError(f"no feasible k in [{k_lo}, {k_hi}] for n={n}")
    dist = pairwise_distances(points, metric)
    best: Optional[ClusterAssignment] = None
    entries = []
    for k in range(k_lo, k_hi + 1):
        cfg = ClusterConfig(k=k, metric=metric, max_iter=max_iter, seed=seed)
        fit = kmedoids_fit(points, cfg, dist=dist)
        entries.append((k, fit.cost, fit.silhouette))
        if best is None or fit.silhouette > best.silhouette:
            best = fit
    return best, SweepReport(entries=tuple(entries), truncated=truncated)


# --------------------------------------------------------------------------
# incremental PCA
# --------------------------------------------------------------------------

def ipca_fit(data, batch_size: Optional[int] = None,
             n_components: Optional[int] = None) -> IpcaModel:
    """Fit incremental PCA over batches.

    ``data`` is either a single matrix (split into ``batch_size`` chunks) or an
    iterable of matrices with equal column counts. Up to min(n_cols, n_seen)
    components are retained unless ``n_components`` caps them.
    """
    if isinstance(data, np.ndarray):
        data = _validate_points(data)
        if batch_size is None:
            batches: Iterable[np.ndarray] = [data]
        else:
            if batch_size < 1:
                raise ValueError("batch_size must be >= 1")
            batches = (data[i:i + batch_size]
                       for i in range(0, data.shape[0], batch_size))
    else:
        batches = data

    mean = None
    m2 = None           # per-column sum of squared deviations, merged per batch
    singular = None
    components = None
    n_seen = 0
    n_cols = None
    for batch in batches:
        batch = _validate_points(batch)
        if batch.shape[0] == 0:
            continue
        if n_cols is None:
            n_cols = batch.shape[1]
        elif batch.shape[1] != n_cols:
            raise ClusteringError(
                f"batch has {batch.shape[1]} columns, expected {n_cols}")
        m = batch.shape[0]
        batch_mean = batch.mean(axis=0)
        centered = batch - batch_mean
        batch_m2 = (centered * centered).sum(axis=0)
        if n_seen == 0:
            mean = batch_mean
            m2 = batch_m2
            _, s, vt = np.linalg.svd(centered, full_matrices=False)
            singular, components = s, vt
            n_seen = m
        else:
            total = n_seen + m
            delta = batch_mean - mean
            correction = np.sqrt(n_seen * m / total) * delta
            stack = np.vstack([singular[:, None] * components,
                               centered,
                               correction[None, :]])
            _, s, vt = np.linalg.svd(stack, full_matrices=False)
            singular, components = s, vt
            mean = mean + delta * (m / total)
            m2 = m2 + batch_m2 + delta * delta * (n_seen * m / total)
            n_seen = total
        keep = min(n_cols, n_seen)
        if n_components is not None:
            keep = min(keep, n_components)
        singular = singular[:keep]
        components = components[:keep]
    if n_seen < 2:
        raise ClusteringError("incremental PCA needs at least 2 samples")
    total_var = m2.sum() / (n_seen - 1)
    explained = (singular ** 2) / (n_seen - 1)
    if total_var > 0:
        ratio = explained / total_var
    else:
        ratio = np.zeros_like(explained)
    return IpcaModel(mean=mean, components=components, singular_values=singular,
                     explained_variance_ratio=ratio, n_seen=n_seen)


def reduce_to_variance(model: IpcaModel, points,
                       threshold: float = 0.85) -> tuple[np.ndarray, int]:
    """Project onto the smallest component prefix explaining >= threshold."""
    points = _validate_points(points)
    if points.shape[1] != model.n_cols:
        raise ClusteringError(
            f"points have {points.shape[1]} columns, model expects {model.n_cols}")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0, 1]")
    cum = np.cumsum(model.explained_variance_ratio)
    reached = np.nonzero(cum >= threshold)[0]
    if len(reached) == 0:
        raise ClusteringError(
            f"retained components explain only {cum[-1]:.6f} < {threshold} of variance")
    m = int(reached[0]) + 1
    reduced = (points - model.mean) @ model.components[:m].T
    return reduced, m


# --------------------------------------------------------------------------
# embedding file formats
# --------------------------------------------------------------------------

def load_embeddings(path, fmt: str = "text") -> EmbeddingMatrix:
    """Read an embedding matrix.

    Text format: first line `n_rows n_cols`, then one row of space-separated
    floats per line. Binary format: two little-endian uint64 (n_rows, n_cols)
    followed by n_rows*n_cols little-endian float32, row-major.
    """
    if fmt == "text":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise EmbeddingFormatError(f"{path}: header must be 'n_rows n_cols'")
            try:
                n_rows, n_cols = int(header[0]), int(header[1])
            except ValueError as exc:
                raise EmbeddingFormatError(f"{path}: bad header {header}") from exc
            values = []
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                row = line.split()
                if len(row) != n_cols:
                    raise EmbeddingFormatError(
                        f"{path}:{lineno}: expected {n_cols} values, got {len(row)}")
                try:
                    values.append([float(v) for v in row])
                except ValueError as exc:
                    raise EmbeddingFormatError(f"{path}:{lineno}: {exc}") from exc
        if len(values) != n_rows:
            raise EmbeddingFormatError(
                f"{path}: header declares {n_rows} rows, found {len(values)}")
        matrix = np.asarray(values, dtype=np.float64).reshape(n_rows, n_cols)
    elif fmt == "binary":
        with open(path, "rb") as fh:
            head = fh.read(16)
            if len(head) != 16:
                raise EmbeddingFormatError(f"{path}: truncated binary header")
            n_rows, n_cols = struct.unpack("<QQ", head)
            payload = fh.read()
        expected = n_rows * n_cols * 4
        if len(payload) != expected:
            raise EmbeddingFormatError(
                f"{path}: payload is {len(payload)} bytes, expected {expected}")
        matrix = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        matrix = matrix.reshape(n_rows, n_cols)
    else:
        raise ValueError("fmt must be 'text' or 'binary'")
    return EmbeddingMatrix(values=matrix)


def save_embeddings(matrix: EmbeddingMatrix, path, fmt: str = "text") -> None:
    if fmt == "text":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{matrix.n_rows} {matrix.n_cols}\n")
            for row in matrix.values:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")
    elif fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(struct.pack("<QQ", matrix.n_rows, matrix.n_cols))
            fh.write(matrix.values.astype("<f4").tobytes(order="C"))
    else:
        raise ValueError("fmt must be 'text' or 'binary'")


def load_embedding_ids(path) -> list[str]:
    """Companion id list: one sentence id per line."""
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]
