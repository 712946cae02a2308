"""Cluster validity indices, model selection over the dendrogram, and cluster reports."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .birch import ClusterModel, Dendrogram, cf_centroid, cut, nearest_index
from .series import FEATURE_NAMES, Scaler, apply, invert

EUCLIDEAN = "euclidean"
HAMMING = "hamming"
DEFAULT_BINS = 16
LAST_HIERARCHIES = 30


class DegenerateClustersError(ValueError):
    """Two clusters share a centroid, so the Davies-Bouldin ratio is undefined."""

    def __init__(self, i, j):
        super().__init__(f"clusters {i} and {j} have coincident centroids")
        self.pair = (i, j)


def _as_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return x


def davies_bouldin(points, labels) -> float:
    x = _as_points(points)
    labels = np.asarray(labels)
    if labels.shape[0] != x.shape[0]:
        raise ValueError("labels and points are misaligned")
    uniq = np.unique(labels)
    if uniq.size < 2:
        raise ValueError("Davies-Bouldin needs at least 2 clusters")
    cents = np.empty((uniq.size, x.shape[1]))
    scatter = np.empty(uniq.size)
    for i, c in enumerate(uniq):
        members = x[labels == c]
        cents[i] = members.mean(axis=0)
        scatter[i] = np.mean(np.sqrt(np.sum((members - cents[i]) ** 2, axis=1)))
    worst = np.empty(uniq.size)
    for i in range(uniq.size):
        best = -math.inf
        for j in range(uniq.size):
            if j == i:
                continue
            gap = float(np.sqrt(np.sum((cents[i] - cents[j]) ** 2)))
            if gap == 0.0:
                raise DegenerateClustersError(uniq[i].item(), uniq[j].item())
            best = max(best, (scatter[i] + scatter[j]) / gap)
        worst[i] = best
    return float(np.mean(worst))


@dataclass
class SweepResult:
    ks: list[int]
    dbi: list[float]
    best_k: int


def default_k_range(n_leaves: int, hierarchies: int = LAST_HIERARCHIES) -> range:
    """k = 2 .. hierarchies+1, clipped to the number of leaves."""
    return range(2, min(hierarchies + 1, n_leaves) + 1)


def dbi_sweep(dendrogram: Dendrogram, points, k_range: Iterable[int] | None = None,
              point_entry=None) -> SweepResult:
    """Davies-Bouldin index of the point labelling at every k in ``k_range``.

    ``point_entry`` maps each point to its leaf entry; when omitted the points
    are the leaves themselves. Cuts leaving fewer than two populated clusters,
    or coincident centroids, score ``inf``. The smallest k wins ties.
    """
    x = _as_points(points)
    n = dendrogram.n_leaves
    ks = list(default_k_range(n) if k_range is None else k_range)
    if not ks or any(k < 2 or k > n for k in ks):
        raise ValueError(f"k range must be non-empty and within [2, {n}]")
    if point_entry is None:
        if x.shape[0] != n:
            raise ValueError("point_entry is required when points are not the dendrogram leaves")
        point_entry = np.arange(n)
    point_entry = np.asarray(point_entry, dtype=np.int64)
    values = []
    for k in ks:
        labels = cut(dendrogram, k)[point_entry]
        try:
            values.append(davies_bouldin(x, labels) if np.unique(labels).size >= 2 else math.inf)
        except DegenerateClustersError:
            values.append(math.inf)
    best = min(range(len(ks)), key=lambda i: (values[i], ks[i]))
    return SweepResult(ks, values, ks[best])


# -- dissimilarity and silhouette ----------------------------------------------------

@dataclass
class Quantizer:
    """Equal-width binning per dimension, fitted on a point set."""

    lo: np.ndarray
    hi: np.ndarray
    bins: int = DEFAULT_BINS

    @classmethod
    def fit(cls, points, bins: int = DEFAULT_BINS) -> "Quantizer":
        x = _as_points(points)
        if bins < 1:
            raise ValueError("bins must be >= 1")
        return cls(x.min(axis=0), x.max(axis=0), bins)

    def transform(self, points) -> np.ndarray:
        x = _as_points(points)
        span = self.hi - self.lo
        safe = np.where(span > 0, span, 1.0)
        idx = np.floor((x - self.lo) / safe * self.bins)
        idx = np.where(span > 0, idx, 0.0)
        return np.clip(idx, 0, self.bins - 1)


def dissimilarity(a, b, mode: str = EUCLIDEAN, quantizer: Quantizer | None = None, eps: float = 0.0) -> float:
    """Euclidean distance, or the number of (binned) coordinates that differ by more than eps."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    if mode == EUCLIDEAN:
        return float(np.sqrt(np.sum((a - b) ** 2)))
    if mode == HAMMING:
        if quantizer is not None:
            a, b = quantizer.transform(a[None, :])[0], quantizer.transform(b[None, :])[0]
        return float(np.count_nonzero(np.abs(a - b) > eps))
    raise ValueError(f"unknown dissimilarity mode {mode!r}")


@dataclass
class SilhouetteResult:
    values: np.ndarray
    labels: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    def bands(self) -> dict[int, list[float]]:
        """Per-cluster values sorted descending, the layout of a silhouette plot."""
        return {int(c): sorted(self.values[self.labels == c].tolist(), reverse=True)
                for c in np.unique(self.labels)}


def silhouette(points, labels, mode: str = EUCLIDEAN, bins: int = DEFAULT_BINS, eps: float = 0.0,
               backend: str | None = None) -> SilhouetteResult:
    x = _as_points(points)
    labels = np.asarray(labels)
    if labels.shape[0] != x.shape[0]:
        raise ValueError("labels and points are misaligned")
    uniq, idx = np.unique(labels, return_inverse=True)
    k = uniq.size
    if k < 2:
        raise ValueError("silhouette needs at least 2 clusters")
    if mode == EUCLIDEAN:
        sums = kernels.dissimilarity_sums(x, idx, k, 0, backend=backend)
    elif mode == HAMMING:
        q = Quantizer.fit(x, bins).transform(x)
        sums = kernels.dissimilarity_sums(q, idx, k, 1, eps, backend=backend)
    else:
        raise ValueError(f"unknown dissimilarity mode {mode!r}")
    counts = np.bincount(idx, minlength=k).astype(float)
    rows = np.arange(x.shape[0])
    own = counts[idx]
    a = np.where(own > 1, sums[rows, idx] / np.maximum(own - 1, 1), 0.0)
    means = sums / counts[None, :]
    means[rows, idx] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where((own > 1) & (denom > 0), (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    return SilhouetteResult(np.clip(s, -1.0, 1.0), labels.copy())


# -- summaries -----------------------------------------------------------------

@dataclass
class ClusterSummary:
    label: int
    count: int
    minimum: list[float]
    median: list[float]
    maximum: list[float]
    outlier: bool
    notes: str = ""


_LEVELS = ("little", "medium", "large")


def _describe(median: np.ndarray, cuts: np.ndarray, names: Sequence[str]) -> str:
    parts = []
    for name in ("cpu", "ram", "disk"):
        if name not in names:
            continue
        j = names.index(name)
        level = int(np.searchsorted(cuts[:, j], median[j], side="right"))
        parts.append(f"{_LEVELS[min(level, 2)]} {name}")
    return ", ".join(parts)


def cluster_summary(features, labels, min_cluster_size: int = 2,
                    feature_names: Sequence[str] = FEATURE_NAMES) -> list[ClusterSummary]:
    """Count and min/median/max per feature for each cluster.

    Clusters smaller than ``min_cluster_size`` are flagged as outliers. Notes
    grade cpu/ram/disk medians against the overall tertiles.
    """
    x = _as_points(features)
    labels = np.asarray(labels)
    if labels.shape[0] != x.shape[0]:
        raise ValueError("labels and features are misaligned")
    names = list(feature_names)
    if len(names) != x.shape[1]:
        raise ValueError(f"{len(names)} feature names for {x.shape[1]} columns")
    cuts = np.quantile(x, [1 / 3, 2 / 3], axis=0) if x.shape[0] else np.zeros((2, x.shape[1]))
    out = []
    for c in np.unique(labels):
        members = x[labels == c]
        med = np.median(members, axis=0)
        out.append(ClusterSummary(
            label=int(c),
            count=int(members.shape[0]),
            minimum=members.min(axis=0).tolist(),
            median=med.tolist(),
            maximum=members.max(axis=0).tolist(),
            outlier=members.shape[0] < min_cluster_size,
            notes=_describe(med, cuts, names),
        ))
    return out


def summary_table(summaries: Sequence[ClusterSummary]) -> list[tuple[str, int, str]]:
    """Rows of (cluster, count, features) for non-outlier clusters."""
    return [(f"Cluster{s.label}", s.count, s.notes) for s in summaries if not s.outlier]


@dataclass
class ClusterReport:
    k: int
    labels: list[int]
    dbi: float
    silhouette: list[float]
    silhouette_mean: float
    summaries: list[ClusterSummary]
    sweep: SweepResult | None = None
    extra: dict = field(default_factory=dict)

    @property
    def outliers(self) -> list[int]:
        return [s.label for s in self.summaries if s.outlier]

    def to_dict(self) -> dict:
        d = {
            "k": self.k,
            "labels": list(map(int, self.labels)),
            "dbi": _json_float(self.dbi),
            "silhouette": [float(v) for v in self.silhouette],
            "silhouette_mean": float(self.silhouette_mean),
            "summaries": [asdict(s) for s in self.summaries],
            "outliers": self.outliers,
        }
        if self.sweep is not None:
            d["sweep"] = {"k": self.sweep.ks, "dbi": [_json_float(v) for v in self.sweep.dbi],
                          "best_k": self.sweep.best_k}
        d.update(self.extra)
        return d


def _json_float(v: float):
    return float(v) if math.isfinite(v) else None


# -- subtask relevance ----------------------------------------------------------------

RESOURCE_DIMS = (2, 3, 4)
PERCENTILES = (5, 25, 50, 75, 95)


@dataclass
class SubtaskRelevance:
    labels: np.ndarray
    requests: np.ndarray  # (n, 3) original units
    tables: dict[int, dict[str, list[float]]]
    separation: float
    skipped: int
    agreement: float | None = None

    def scatter_rows(self) -> list[tuple[float, float, float, int]]:
        return [(float(r[0]), float(r[1]), float(r[2]), int(c)) for r, c in zip(self.requests, self.labels)]

    def to_dict(self) -> dict:
        return {
            "count": int(self.labels.size),
            "skipped": self.skipped,
            "separation": _json_float(self.separation),
            "agreement": self.agreement,
            "percentiles": list(PERCENTILES),
            "tables": {str(k): v for k, v in self.tables.items()},
        }


def per_task_centroids(model: ClusterModel, scaler: Scaler | None = None) -> np.ndarray:
    """Per-task (cpu, ram, disk) centre of every job cluster, in original units.

    A job's request is the sum over its tasks, so the cluster's summed request is
    divided by its summed parallelism.
    """
    scaler = scaler or model.scaler or Scaler.identity(model.entry_ls.shape[1])
    rows = []
    for e in model.cluster_entries():
        mean_feat = invert(scaler, cf_centroid(e)[None, :])[0]
        p = mean_feat[1] if mean_feat[1] > 0 else 1.0
        rows.append(mean_feat[list(RESOURCE_DIMS)] / p)
    return np.array(rows)


def separation_score(points, labels) -> float:
    """Mean pairwise distance between cluster centroids over mean within-cluster RMS spread."""
    x = _as_points(points)
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    if uniq.size < 2:
        return math.nan
    cents = np.array([x[labels == c].mean(axis=0) for c in uniq])
    spread = np.array([np.sqrt(np.mean(np.sum((x[labels == c] - cents[i]) ** 2, axis=1)))
                       for i, c in enumerate(uniq)])
    gaps = [np.linalg.norm(cents[i] - cents[j]) for i in range(uniq.size) for j in range(i)]
    intra = float(np.mean(spread))
    if intra == 0.0:
        return math.inf
    return float(np.mean(gaps)) / intra


def subtask_relevance(subtasks, model: ClusterModel, scaler: Scaler | None = None,
                      parent_labels: dict[int, int] | None = None) -> SubtaskRelevance:
    """Assign subtasks to job clusters by nearest per-task centre in (cpu, ram, disk).

    ``subtasks`` holds TaskEvent-like objects. Records with a missing resource
    field are skipped and counted. With ``parent_labels`` (job_id -> cluster),
    the fraction of subtasks landing in their parent job's cluster is reported.
    """
    scaler = scaler or model.scaler or Scaler.identity(model.entry_ls.shape[1])
    res_scaler = scaler.subset(RESOURCE_DIMS)
    reqs, jobs, skipped = [], [], 0
    for t in subtasks:
        vals = (t.cpu_request, t.ram_request, t.disk_request)
        if any(v is None or not math.isfinite(v) for v in vals):
            skipped += 1
            continue
        reqs.append(vals)
        jobs.append(t.job_id)
    reqs_arr = np.array(reqs, dtype=float).reshape(-1, 3)
    if reqs_arr.shape[0] == 0:
        return SubtaskRelevance(np.zeros(0, dtype=np.int64), reqs_arr, {}, math.nan, skipped, None)

    centres = apply(res_scaler, per_task_centroids(model, scaler))
    scaled = apply(res_scaler, reqs_arr)
    labels = nearest_index(scaled, centres)
    tables = {}
    for c in np.unique(labels):
        members = reqs_arr[labels == c]
        tables[int(c)] = {name: np.percentile(members[:, j], PERCENTILES).tolist()
                          for j, name in enumerate(("cpu", "ram", "disk"))}
    agreement = None
    if parent_labels is not None:
        hits = [parent_labels.get(j) == int(c) for j, c in zip(jobs, labels)]
        agreement = float(np.mean(hits))
    return SubtaskRelevance(labels, reqs_arr, tables, separation_score(scaled, labels), skipped, agreement)
