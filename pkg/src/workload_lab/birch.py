"""BIRCH: clustering-feature tree plus a centroid-linkage global phase."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .series import Scaler


@dataclass(frozen=True, eq=False)
class CFEntry:
    n: int
    ls: np.ndarray
    ss: float

    @property
    def d(self) -> int:
        return self.ls.shape[0]

    def __eq__(self, other):
        if not isinstance(other, CFEntry):
            return NotImplemented
        return self.n == other.n and self.ss == other.ss and np.array_equal(self.ls, other.ls)


def cf_empty(d: int) -> CFEntry:
    return CFEntry(0, np.zeros(d), 0.0)


def cf_from_point(x) -> CFEntry:
    x = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite coordinates")
    return CFEntry(1, x.copy(), float(np.dot(x, x)))


def cf_merge(a: CFEntry, b: CFEntry) -> CFEntry:
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")
    return CFEntry(a.n + b.n, a.ls + b.ls, a.ss + b.ss)


def cf_centroid(e: CFEntry) -> np.ndarray:
    if e.n <= 0:
        raise ValueError("centroid of an empty CF entry")
    return e.ls / e.n


def cf_radius(e: CFEntry) -> float:
    c = cf_centroid(e)
    return float(np.sqrt(max(0.0, e.ss / e.n - float(np.dot(c, c)))))


def cf_distance(a: CFEntry, b: CFEntry) -> float:
    diff = cf_centroid(a) - cf_centroid(b)
    return float(np.sqrt(np.dot(diff, diff)))


def _sq_dist_rows(points: np.ndarray, cents: np.ndarray) -> np.ndarray:
    acc = np.zeros((points.shape[0], cents.shape[0]))
    for k in range(points.shape[1]):
        diff = points[:, k][:, None] - cents[:, k][None, :]
        acc += diff * diff
    return acc


def nearest_index(points, centroids, block: int = 2048) -> np.ndarray:
    """Index of the nearest centroid for every point; ties go to the lowest index."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    centroids = np.atleast_2d(np.asarray(centroids, dtype=float))
    if points.shape[1] != centroids.shape[1]:
        raise ValueError(f"dimension mismatch: {points.shape[1]} vs {centroids.shape[1]}")
    out = np.empty(points.shape[0], dtype=np.int64)
    for s in range(0, points.shape[0], block):
        out[s:s + block] = np.argmin(_sq_dist_rows(points[s:s + block], centroids), axis=1)
    return out


class _Node:
    __slots__ = ("is_leaf", "entries", "children")

    def __init__(self, is_leaf: bool, entries=None, children=None):
        self.is_leaf = is_leaf
        self.entries: list[CFEntry] = entries or []
        self.children: list[_Node] = children or []

    def total(self) -> CFEntry:
        acc = self.entries[0]
        for e in self.entries[1:]:
            acc = cf_merge(acc, e)
        return acc

    def closest(self, e: CFEntry) -> int:
        cents = np.array([x.ls / x.n for x in self.entries])
        return int(np.argmin(_sq_dist_rows(cf_centroid(e)[None, :], cents)[0]))


class CFTree:
    """Height-balanced CF tree.

    ``branching`` bounds internal nodes, ``leaf_capacity`` bounds leaves, and a
    leaf entry absorbs a point only while its radius stays within ``threshold``.
    """

    def __init__(self, d: int, branching: int = 50, leaf_capacity: int = 50, threshold: float = 0.0):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        if branching < 2 or leaf_capacity < 2:
            raise ValueError("branching factor and leaf capacity must be >= 2")
        if not threshold >= 0:
            raise ValueError("threshold must be >= 0")
        self.d = d
        self.branching = branching
        self.leaf_capacity = leaf_capacity
        self.threshold = float(threshold)
        self.root = _Node(is_leaf=True)
        self.inserted = 0

    def insert(self, x) -> "CFTree":
        e = cf_from_point(x)
        if e.d != self.d:
            raise ValueError(f"point has dimension {e.d}, tree expects {self.d}")
        split = self._insert(self.root, e)
        if split is not None:
            a, b = split
            self.root = _Node(False, [a.total(), b.total()], [a, b])
        self.inserted += 1
        return self

    def extend(self, points) -> "CFTree":
        for x in np.asarray(points, dtype=float):
            self.insert(x)
        return self

    def _insert(self, node: _Node, e: CFEntry):
        if node.is_leaf:
            if node.entries:
                i = node.closest(e)
                merged = cf_merge(node.entries[i], e)
                if cf_radius(merged) <= self.threshold:
                    node.entries[i] = merged
                    return None
            node.entries.append(e)
            if len(node.entries) > self.leaf_capacity:
                return self._split(node)
            return None

        i = node.closest(e)
        res = self._insert(node.children[i], e)
        if res is None:
            node.entries[i] = cf_merge(node.entries[i], e)
            return None
        a, b = res
        node.entries[i:i + 1] = [a.total(), b.total()]
        node.children[i:i + 1] = [a, b]
        if len(node.entries) > self.branching:
            return self._split(node)
        return None

    @staticmethod
    def _split(node: _Node) -> tuple[_Node, _Node]:
        # seeds: farthest pair of entry centroids, first such pair in row-major order
        cents = np.array([cf_centroid(e) for e in node.entries])
        dm = _sq_dist_rows(cents, cents)
        m = len(node.entries)
        iu = np.triu_indices(m, 1)
        flat = int(np.argmax(dm[iu]))
        s1, s2 = int(iu[0][flat]), int(iu[1][flat])
        to_second = dm[:, s2] < dm[:, s1]
        to_second[s1], to_second[s2] = False, True
        left = _Node(node.is_leaf)
        right = _Node(node.is_leaf)
        for idx in range(m):
            tgt = right if to_second[idx] else left
            tgt.entries.append(node.entries[idx])
            if not node.is_leaf:
                tgt.children.append(node.children[idx])
        return left, right

    # -- inspection ----------------------------------------------------------

    def leaves(self) -> Iterator[_Node]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.extend(reversed(node.children))

    def leaf_entries(self) -> list[CFEntry]:
        return [e for leaf in self.leaves() for e in leaf.entries]

    def root_entry(self) -> CFEntry:
        if not self.root.entries:
            return cf_empty(self.d)
        return self.root.total()

    def leaf_depths(self) -> list[int]:
        depths = []
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            if node.is_leaf:
                depths.append(depth)
            else:
                stack.extend((c, depth + 1) for c in node.children)
        return depths

    def nodes(self) -> Iterator[_Node]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.extend(node.children)


def leaf_entries(tree: CFTree) -> list[CFEntry]:
    return tree.leaf_entries()


def estimate_threshold(points, sample_size: int = 1000, seed: int = 0) -> float:
    """Median nearest-neighbour distance over a seeded sample of the points."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 2:
        return 0.0
    if pts.shape[0] > sample_size:
        idx = np.sort(np.random.default_rng(seed).choice(pts.shape[0], sample_size, replace=False))
        pts = pts[idx]
    dm = _sq_dist_rows(pts, pts)
    np.fill_diagonal(dm, np.inf)
    return float(np.median(np.sqrt(dm.min(axis=1))))


# -- global phase --------------------------------------------------------------

@dataclass
class Dendrogram:
    """Merge list over ``n_leaves`` leaf entries; merge ``s`` creates id ``n_leaves + s``."""

    pairs: np.ndarray  # (n_leaves - 1, 2) int64, left < right
    distances: np.ndarray
    n_leaves: int

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        self.distances = np.asarray(self.distances, dtype=float)
        if self.pairs.shape[0] != max(self.n_leaves - 1, 0):
            raise ValueError("a dendrogram over n leaves has n-1 merges")

    def rows(self) -> list[tuple[int, int, float, int]]:
        return [(int(l), int(r), float(d), self.n_leaves + s)
                for s, ((l, r), d) in enumerate(zip(self.pairs, self.distances))]


def global_cluster(entries: Sequence[CFEntry], backend: str | None = None) -> Dendrogram:
    """Centroid-linkage agglomeration of CF entries, weighted by entry counts."""
    if not entries:
        raise ValueError("global clustering needs at least one entry")
    ls = np.array([e.ls for e in entries], dtype=float)
    w = np.array([e.n for e in entries], dtype=float)
    if np.any(w <= 0):
        raise ValueError("empty CF entry in global clustering input")
    pairs, dists = kernels.centroid_linkage(ls, w, backend=backend)
    return Dendrogram(pairs, dists, len(entries))


def cut(dendrogram: Dendrogram, k: int) -> np.ndarray:
    """Labels for the leaf entries after undoing the last k-1 merges."""
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    parent = list(range(2 * n - 1 if n > 0 else 0))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for s in range(n - k):
        left, right = dendrogram.pairs[s]
        new = n + s
        parent[find(int(left))] = new
        parent[find(int(right))] = new
    labels = np.empty(n, dtype=np.int64)
    seen: dict[int, int] = {}
    for i in range(n):
        labels[i] = seen.setdefault(find(i), len(seen))
    return labels


def assign(points, entry_labels, entries: Sequence[CFEntry] | CFTree) -> np.ndarray:
    """Label every point by the cluster of the leaf entry with the nearest centroid."""
    if isinstance(entries, CFTree):
        entries = entries.leaf_entries()
    cents = np.array([cf_centroid(e) for e in entries])
    entry_labels = np.asarray(entry_labels)
    if entry_labels.shape[0] != cents.shape[0]:
        raise ValueError("one label per leaf entry is required")
    return entry_labels[nearest_index(points, cents)]


# -- fitted model ----------------------------------------------------------------

@dataclass
class ClusterModel:
    """Leaf entries of a fitted tree, their cluster labels and the feature scaler."""

    entry_n: np.ndarray
    entry_ls: np.ndarray
    entry_ss: np.ndarray
    entry_labels: np.ndarray
    scaler: Scaler | None = None

    @classmethod
    def from_entries(cls, entries: Sequence[CFEntry], entry_labels, scaler: Scaler | None = None):
        return cls(
            np.array([e.n for e in entries], dtype=np.int64),
            np.array([e.ls for e in entries], dtype=float),
            np.array([e.ss for e in entries], dtype=float),
            np.asarray(entry_labels, dtype=np.int64),
            scaler,
        )

    def entries(self) -> list[CFEntry]:
        return [CFEntry(int(n), ls, float(ss)) for n, ls, ss in zip(self.entry_n, self.entry_ls, self.entry_ss)]

    @property
    def k(self) -> int:
        return int(self.entry_labels.max()) + 1 if self.entry_labels.size else 0

    def cluster_entries(self) -> list[CFEntry]:
        """One merged CF entry per cluster label."""
        d = self.entry_ls.shape[1]
        out = []
        for c in range(self.k):
            acc = cf_empty(d)
            for e, lab in zip(self.entries(), self.entry_labels):
                if lab == c:
                    acc = cf_merge(acc, e)
            out.append(acc)
        return out

    def predict(self, points) -> np.ndarray:
        return self.entry_labels[nearest_index(points, self.entry_ls / self.entry_n[:, None])]

    def to_dict(self) -> dict:
        return {
            "entry_n": self.entry_n.tolist(),
            "entry_ls": self.entry_ls.tolist(),
            "entry_ss": self.entry_ss.tolist(),
            "entry_labels": self.entry_labels.tolist(),
            "scaler": self.scaler.to_dict() if self.scaler is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterModel":
        return cls(
            np.asarray(d["entry_n"], dtype=np.int64),
            np.asarray(d["entry_ls"], dtype=float).reshape(len(d["entry_n"]), -1),
            np.asarray(d["entry_ss"], dtype=float),
            np.asarray(d["entry_labels"], dtype=np.int64),
            Scaler.from_dict(d["scaler"]) if d.get("scaler") else None,
        )
