import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from workload_lab import evalx, pipeline
from workload_lab.birch import ClusterModel, cf_from_point, global_cluster
from workload_lab.evalx import (EUCLIDEAN, HAMMING, DegenerateClustersError, Quantizer, cluster_summary,
                                davies_bouldin, dbi_sweep, default_k_range, dissimilarity,
                                separation_score, silhouette, subtask_relevance, summary_table)
from workload_lab.series import feature_matrix
from workload_lab.trace import EventType, SynthConfig, TaskEvent, assemble_jobs, synth_trace


def test_dbi_hand_case():
    pts = np.array([0.0, 2.0, 10.0, 12.0])
    assert davies_bouldin(pts, [0, 0, 1, 1]) == 0.2


def test_dbi_singletons():
    assert davies_bouldin(np.array([[0.0, 1.0], [4.0, 4.0]]), [0, 1]) == 0


def test_dbi_errors():
    with pytest.raises(ValueError):
        davies_bouldin(np.zeros((3, 2)), [0, 0, 0])
    with pytest.raises(DegenerateClustersError) as err:
        davies_bouldin(np.array([-1.0, 1.0, 0.0]), [0, 0, 1])
    assert err.value.pair == (0, 1)


@pytest.mark.parametrize("seed", range(10))
def test_dbi_matches_oracle_and_is_invariant(seed):
    rng = np.random.default_rng(seed)
    n, d, k = int(rng.integers(10, 200)), int(rng.integers(1, 6)), int(rng.integers(2, 9))
    x = rng.normal(size=(n, d))
    labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
    ref = oracles.davies_bouldin(x, labels)
    assert abs(davies_bouldin(x, labels) - ref) <= 1e-9
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    assert abs(davies_bouldin(3.7 * x @ q + 5.0, labels) - ref) <= 1e-9


def test_sweep_blobs_pick_three():
    rng = np.random.default_rng(0)
    centres = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    pts = np.concatenate([c + rng.normal(size=(30, 2)) for c in centres])
    dg = global_cluster([cf_from_point(p) for p in pts])
    res = dbi_sweep(dg, pts)
    assert res.ks == list(range(2, 32))
    assert res.best_k == 3
    assert abs(res.dbi[1] - oracles.davies_bouldin(pts, evalx.cut(dg, 3))) <= 1e-9
    # extending the range with worse k values keeps the argmin
    assert dbi_sweep(dg, pts, range(2, 6)).best_k == 3


def test_sweep_singleton_range_and_errors():
    pts = np.arange(6.0)
    dg = global_cluster([cf_from_point([p]) for p in pts])
    res = dbi_sweep(dg, pts, [2])
    assert res.best_k == 2 and len(res.dbi) == 1
    with pytest.raises(ValueError):
        dbi_sweep(dg, pts, [1, 2])
    with pytest.raises(ValueError):
        dbi_sweep(dg, pts, [7])


def test_default_range_clipped():
    assert list(default_k_range(5)) == [2, 3, 4, 5]
    assert default_k_range(1000)[-1] == 31


def test_dissimilarity_examples():
    v = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
    assert dissimilarity(v, v) == 0
    assert dissimilarity(v, v, HAMMING) == 0
    w = v.copy()
    w[[1, 3]] += 1.0
    assert dissimilarity(v, w, HAMMING) == 2
    q = Quantizer.fit(np.array([np.zeros(5), np.ones(5)]), 16)
    assert dissimilarity([0, 0, 0, 0, 0], [0.01, 0, 0, 0, 0.99], HAMMING, q) == 1
    with pytest.raises(ValueError):
        dissimilarity([1.0], [1.0, 2.0])


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=8), st.data())
def test_hamming_range(a, data):
    b = data.draw(st.lists(st.floats(-5, 5), min_size=len(a), max_size=len(a)))
    h = dissimilarity(a, b, HAMMING)
    assert h == int(h) and 0 <= h <= len(a)


def test_silhouette_duplicates_score_one():
    x = np.array([[0.0, 0.0]] * 3 + [[1.0, 1.0]] * 4)
    labels = [0, 0, 0, 1, 1, 1, 1]
    assert silhouette(x, labels).values.tolist() == [1.0] * 7
    assert silhouette(x, labels, HAMMING).values.tolist() == [1.0] * 7


def test_silhouette_singleton_is_zero():
    s = silhouette(np.array([0.0, 0.1, 5.0]), [0, 0, 1])
    assert s.values[2] == 0
    with pytest.raises(ValueError):
        silhouette(np.zeros(3), [1, 1, 1])


@pytest.mark.parametrize("mode", [EUCLIDEAN, HAMMING])
@pytest.mark.parametrize("seed", range(6))
def test_silhouette_matches_oracle(backend, mode, seed):
    rng = np.random.default_rng(seed)
    n, d, k = int(rng.integers(5, 150)), int(rng.integers(1, 6)), int(rng.integers(2, 6))
    x = rng.random((n, d))
    labels = rng.integers(0, k, size=n)
    if np.unique(labels).size < 2:
        labels[0] = 1 - labels[0]
    got = silhouette(x, labels, mode, backend=backend).values
    np.testing.assert_allclose(got, oracles.silhouette(x, labels, mode), rtol=0, atol=1e-9)
    assert np.all((got >= -1) & (got <= 1))


def test_silhouette_bands_sorted():
    s = silhouette(np.array([0.0, 0.2, 0.1, 4.0, 4.5]), [0, 0, 0, 1, 1])
    bands = s.bands()
    assert set(bands) == {0, 1}
    assert bands[0] == sorted(bands[0], reverse=True)


def test_cluster_summary():
    rng = np.random.default_rng(0)
    feats = rng.random((20, 5))
    labels = np.array([0] * 12 + [1] * 7 + [2])
    summ = cluster_summary(feats, labels, min_cluster_size=2)
    assert [s.count for s in summ] == [12, 7, 1]
    assert sum(s.count for s in summ) == 20
    assert [s.outlier for s in summ] == [False, False, True]
    rows = summary_table(summ)
    assert [r[:2] for r in rows] == [("Cluster0", 12), ("Cluster1", 7)]
    assert all(w in rows[0][2] for w in ("cpu", "ram", "disk"))
    with pytest.raises(ValueError):
        cluster_summary(feats, labels[:5])


def test_report_to_dict_handles_infinite_dbi():
    rep = evalx.ClusterReport(2, [0, 1], math.inf, [0.0, 0.0], 0.0, [])
    assert rep.to_dict()["dbi"] is None


def test_separation_score():
    pts = np.array([[0.0], [2.0], [10.0], [12.0]])
    assert separation_score(pts, [0, 0, 1, 1]) == 10.0


def _model():
    # two clusters of jobs: (interval, parallelism, cpu, ram, disk)
    entries = [cf_from_point([0, 2, 0.2, 0.2, 0.2]), cf_from_point([0, 4, 2.0, 0.4, 0.4])]
    return ClusterModel.from_entries(entries, [0, 1])


def test_subtask_at_centre_assigned_there():
    model = _model()
    tasks = [TaskEvent(0, 1, 0, EventType.SUBMIT, 0.5, 0.1, 0.1),
             TaskEvent(0, 1, 1, EventType.SUBMIT, 0.1, 0.1, 0.1),
             TaskEvent(0, 1, 2, EventType.SUBMIT, None, 0.1, 0.1)]
    rel = subtask_relevance(tasks, model)
    assert rel.labels.tolist() == [1, 0]
    assert rel.skipped == 1


def test_zero_subtasks():
    rel = subtask_relevance([], _model())
    assert rel.labels.size == 0 and rel.tables == {} and rel.skipped == 0


@pytest.mark.parametrize("seed", [0, 4, 5])
def test_synthetic_subtasks_separate(seed):
    tr = synth_trace(SynthConfig(600, 3, 0.05, seed))
    jobs = assemble_jobs(tr.job_events, tr.task_events).jobs
    run = pipeline.cluster_features(feature_matrix(jobs))
    parents = {j.job_id: int(l) for j, l in zip(jobs, run.labels)}
    rel = subtask_relevance(tr.task_events, run.model, parent_labels=parents)
    # brute-force check of the score on the assigned subtasks
    scaled = (rel.requests - run.scaler.lo[2:]) / run.scaler.span[2:]
    assert rel.separation == pytest.approx(_oracle_separation(scaled, rel.labels), rel=1e-9)
    assert rel.separation >= 2.0


def _oracle_separation(x, labels):
    groups = sorted(set(labels.tolist()))
    cents = {g: x[labels == g].mean(axis=0) for g in groups}
    rms = [math.sqrt(np.mean([np.sum((p - cents[g]) ** 2) for p in x[labels == g]])) for g in groups]
    gaps = [math.dist(cents[a], cents[b]) for i, a in enumerate(groups) for b in groups[:i]]
    return float(np.mean(gaps) / np.mean(rms))
