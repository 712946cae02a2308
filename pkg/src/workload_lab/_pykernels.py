"""Pure numpy versions of the compiled kernels.

The linkage routine performs the same floating-point operations in the same
order as ``_ckernels.centroid_linkage`` so both backends emit identical merge
sequences. The dissimilarity sums agree to rounding only.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 512


def _row_dist(cent: np.ndarray, cand: np.ndarray, r: int) -> np.ndarray:
    acc = np.zeros(cand.shape[0])
    for k in range(cent.shape[1]):
        diff = cent[cand, k] - cent[r, k]
        acc = acc + diff * diff
    return np.sqrt(acc)


def _pick(dist: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> int:
    # lexicographic min over (dist, lo, hi); np.lexsort sorts by last key first
    return int(np.lexsort((hi, lo, dist))[0])


def _scan_row(cent, ids, active, r, nn_idx, nn_dist):
    cand = np.flatnonzero(active)
    cand = cand[cand != r]
    if cand.size == 0:
        nn_idx[r] = -1
        nn_dist[r] = 0.0
        return
    d = _row_dist(cent, cand, r)
    lo = np.minimum(ids[cand], ids[r])
    hi = np.maximum(ids[cand], ids[r])
    p = _pick(d, lo, hi)
    nn_idx[r] = cand[p]
    nn_dist[r] = d[p]


def centroid_linkage(ls_in, weights_in):
    ls = np.array(ls_in, dtype=np.float64, order="C", copy=True)
    w = np.array(weights_in, dtype=np.float64, copy=True)
    m, d = ls.shape
    if w.shape[0] != m:
        raise ValueError("weights length does not match entry count")
    pairs = np.zeros((max(m - 1, 0), 2), dtype=np.int64)
    dists = np.zeros(max(m - 1, 0), dtype=np.float64)
    if m <= 1:
        return pairs, dists

    cent = ls / w[:, None]
    ids = np.arange(m, dtype=np.int64)
    active = np.ones(m, dtype=bool)
    nn_idx = np.full(m, -1, dtype=np.int64)
    nn_dist = np.zeros(m)
    for i in range(m):
        _scan_row(cent, ids, active, i, nn_idx, nn_dist)

    for step in range(m - 1):
        rows = np.flatnonzero(active)
        partner = nn_idx[rows]
        lo = np.minimum(ids[rows], ids[partner])
        hi = np.maximum(ids[rows], ids[partner])
        p = _pick(nn_dist[rows], lo, hi)
        a = int(rows[p])
        b = int(nn_idx[a])
        pairs[step] = (lo[p], hi[p])
        dists[step] = nn_dist[a]

        ls[a] = ls[a] + ls[b]
        w[a] = w[a] + w[b]
        cent[a] = ls[a] / w[a]
        ids[a] = m + step
        active[b] = False
        if step == m - 2:
            break

        others = np.flatnonzero(active)
        others = others[others != a]
        stale = (nn_idx[others] == a) | (nn_idx[others] == b)
        for r in others[stale]:
            _scan_row(cent, ids, active, int(r), nn_idx, nn_dist)
        fresh = others[~stale]
        if fresh.size:
            acc = np.zeros(fresh.size)
            for k in range(d):
                diff = cent[fresh, k] - cent[a, k]
                acc = acc + diff * diff
            dr = np.sqrt(acc)
            cur = nn_idx[fresh]
            clo = np.minimum(ids[fresh], ids[cur])
            chi = np.maximum(ids[fresh], ids[cur])
            cd = nn_dist[fresh]
            # new pair key is (ids[r], ids[a]) because ids[a] is the newest id
            better = (dr < cd) | ((dr == cd) & ((ids[fresh] < clo) | ((ids[fresh] == clo) & (ids[a] < chi))))
            nn_idx[fresh[better]] = a
            nn_dist[fresh[better]] = dr[better]
        _scan_row(cent, ids, active, a, nn_idx, nn_dist)
    return pairs, dists


def dissimilarity_sums(x_in, labels_in, k: int, mode: int, eps: float = 0.0) -> np.ndarray:
    x = np.ascontiguousarray(x_in, dtype=np.float64)
    labels = np.ascontiguousarray(labels_in, dtype=np.int64)
    n = x.shape[0]
    if labels.shape[0] != n:
        raise ValueError("labels length does not match sample count")
    onehot = np.zeros((n, k))
    onehot[np.arange(n), labels] = 1.0
    out = np.zeros((n, k))
    for start in range(0, n, _BLOCK):
        blk = x[start:start + _BLOCK]
        if mode == 0:
            sq = np.zeros((blk.shape[0], n))
            for c in range(x.shape[1]):
                diff = blk[:, c][:, None] - x[:, c][None, :]
                sq += diff * diff
            dm = np.sqrt(sq)
        else:
            dm = np.zeros((blk.shape[0], n))
            for c in range(x.shape[1]):
                dm += np.abs(blk[:, c][:, None] - x[:, c][None, :]) > eps
        rows = np.arange(start, start + blk.shape[0])
        dm[np.arange(blk.shape[0]), rows] = 0.0
        out[start:start + blk.shape[0]] = dm @ onehot
    return out
