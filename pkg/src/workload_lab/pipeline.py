"""End-to-end steps shared by the CLI and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import baseline, birch, evalx, nnet
from .series import FEATURE_NAMES, MultiSeries, Scaler, apply, fit_scaler, invert, window

SMALL_RUN = 1000  # at or below this many points the CF threshold defaults to 0


@dataclass
class ClusterRun:
    scaler: Scaler
    scaled: np.ndarray
    tree: birch.CFTree
    entries: list
    dendrogram: birch.Dendrogram
    point_entry: np.ndarray
    sweep: evalx.SweepResult
    k: int
    entry_labels: np.ndarray
    labels: np.ndarray

    @property
    def model(self) -> birch.ClusterModel:
        return birch.ClusterModel.from_entries(self.entries, self.entry_labels, self.scaler)


def resolve_threshold(threshold, scaled: np.ndarray, seed: int = 0) -> float:
    if threshold is None:
        threshold = 0.0 if scaled.shape[0] <= SMALL_RUN else "auto"
    if threshold == "auto":
        return birch.estimate_threshold(scaled, seed=seed)
    return float(threshold)


def cluster_features(features, k: int | None = None, k_range=None, branching: int = 50,
                     leaf_capacity: int = 50, threshold=None, seed: int = 0,
                     scaler: Scaler | None = None) -> ClusterRun:
    """Scale, build the CF tree, agglomerate its leaf entries and pick k.

    With ``k`` unset the Davies-Bouldin minimiser over ``k_range`` is used.
    """
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("clustering needs at least 2 feature vectors")
    scaler = scaler or fit_scaler(x)
    scaled = apply(scaler, x)
    tree = birch.CFTree(x.shape[1], branching, leaf_capacity, resolve_threshold(threshold, scaled, seed))
    tree.extend(scaled)
    entries = tree.leaf_entries()
    if len(entries) < 2:
        raise ValueError("all points fell into one CF entry; lower the threshold")
    dendro = birch.global_cluster(entries)
    cents = np.array([birch.cf_centroid(e) for e in entries])
    point_entry = birch.nearest_index(scaled, cents)
    if k_range is None:
        k_range = evalx.default_k_range(len(entries))
    sweep = evalx.dbi_sweep(dendro, scaled, k_range, point_entry)
    chosen = sweep.best_k if k is None else int(k)
    if not 1 <= chosen <= len(entries):
        raise ValueError(f"k={chosen} exceeds the {len(entries)} CF leaf entries")
    entry_labels = birch.cut(dendro, chosen)
    return ClusterRun(scaler, scaled, tree, entries, dendro, point_entry, sweep, chosen,
                      entry_labels, entry_labels[point_entry])


def cluster_report(run: ClusterRun, features, min_cluster_size: int = 2,
                   silhouette_mode: str = evalx.EUCLIDEAN) -> evalx.ClusterReport:
    labels = run.labels
    present = np.unique(labels).size
    if present >= 2:
        try:
            dbi = evalx.davies_bouldin(run.scaled, labels)
        except evalx.DegenerateClustersError:
            dbi = math.inf
        sil = evalx.silhouette(run.scaled, labels, silhouette_mode)
        sil_values, sil_mean = sil.values.tolist(), sil.mean
    else:
        dbi, sil_values, sil_mean = math.nan, [0.0] * labels.size, 0.0
    summaries = evalx.cluster_summary(features, labels, min_cluster_size, FEATURE_NAMES)
    return evalx.ClusterReport(run.k, labels.tolist(), dbi, sil_values, sil_mean, summaries, run.sweep)


# -- forecasting ---------------------------------------------------------------------

def train_forecaster(series: MultiSeries, spec: nnet.NetworkSpec, config: nnet.TrainConfig,
                     train_fraction: float = 0.8, progress=None):
    """Fit the scaler on the training range, window it and train. Returns (params, history, scaler)."""
    if not 0 < train_fraction <= 1:
        raise ValueError("train fraction must lie in (0, 1]")
    if series.dims != spec.input_dims:
        raise ValueError(f"{spec.variant} network expects {spec.input_dims}-D series, got {series.dims}-D")
    split = int(math.floor(len(series) * train_fraction))
    scaler = fit_scaler(series, (0, split))
    scaled = apply(scaler, series.values)
    data = window(scaled[:split], spec.lookback)
    params, history = nnet.train(spec, data, config, progress=progress)
    return params, history, scaler


def split_index(n: int, train_fraction: float, lookback: int) -> int:
    split = int(math.floor(n * train_fraction))
    if split < lookback or split >= n:
        raise ValueError("no test range left after the training split")
    return split


def forecast_comparison(values, spec: nnet.NetworkSpec, params, scaler: Scaler,
                        train_fraction: float = 0.8, ar_order: int = baseline.DEFAULT_ORDER) -> dict:
    """One-step test-range forecasts of the network and a per-dimension AR model."""
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    split = split_index(v.shape[0], train_fraction, max(spec.lookback, ar_order))
    lstm = invert(scaler, nnet.one_step_forecasts(spec, params, apply(scaler, v), split))
    ar = np.empty_like(lstm)
    for j in range(v.shape[1]):
        model = baseline.ar_fit(v[:split, j], ar_order)
        ar[:, j] = baseline.ar_one_step(model, v[:, j], split)
    truth = v[split:]
    out = {"split": split, "ar_order": ar_order, "dims": []}
    for j in range(v.shape[1]):
        m_lstm = baseline.error_metrics(lstm[:, j], truth[:, j])
        m_ar = baseline.error_metrics(ar[:, j], truth[:, j])
        impr = (baseline.relative_improvement(m_ar["rmse"], m_lstm["rmse"])
                if m_ar["rmse"] > 0 else None)
        out["dims"].append({"lstm": _strip(m_lstm), "ar": _strip(m_ar), "rmse_improvement": impr})
    out["truth"], out["lstm_pred"], out["ar_pred"] = truth, lstm, ar
    return out


def _strip(m: dict) -> dict:
    return {k: m[k] for k in ("mse", "rmse", "mae")}
