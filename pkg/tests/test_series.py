import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from workload_lab.series import (FIVE_MINUTES_US, MultiSeries, aggregate_requests, apply,
                                 feature_matrix, feature_vectors, fit_scaler, interarrival_series,
                                 invert, read_series_csv, window, write_series_csv)
from workload_lab.trace import JobRecord, ResourceVector


def job(t, r=(0.1, 0.2, 0.3), p=1, jid=0):
    return JobRecord(jid, t, p, ResourceVector(*r))


def test_interarrival_examples():
    assert interarrival_series([job(100), job(400), job(900)]).values[:, 0].tolist() == [0, 300, 500]
    assert interarrival_series([job(77)]).values[:, 0].tolist() == [0]
    assert interarrival_series([job(5), job(5)]).values[1, 0] == 0


def test_interarrival_rejects_unsorted():
    with pytest.raises(ValueError):
        interarrival_series([job(10), job(5)])


def test_default_slot_is_five_minutes():
    assert FIVE_MINUTES_US == 300 * 10**6
    s = aggregate_requests([job(0), job(299_999_999), job(300_000_000)])
    assert len(s) == 2


def test_aggregate_single_slot():
    s = aggregate_requests([job(10, (1, 2, 3)), job(200, (4, 5, 6))], slot_us=300)
    assert s.values.tolist() == [[5, 7, 9]]


def test_aggregate_empty_slot_is_zero():
    s = aggregate_requests([job(10, (1, 1, 1)), job(650, (2, 2, 2))], slot_us=300)
    assert s.values.tolist() == [[1, 1, 1], [0, 0, 0], [2, 2, 2]]


def test_aggregate_edge_cases():
    assert len(aggregate_requests([], slot_us=10)) == 0
    with pytest.raises(ValueError):
        aggregate_requests([job(1)], slot_us=0)


sorted_arrivals = st.lists(st.integers(0, 10**12), min_size=1, max_size=60).map(sorted)
resources = st.tuples(*[st.floats(0, 1e3, allow_nan=False)] * 3)


@given(sorted_arrivals, st.data())
@settings(max_examples=80, deadline=None)
def test_reconstruction_and_conservation(arrivals, data):
    reqs = data.draw(st.lists(resources, min_size=len(arrivals), max_size=len(arrivals)))
    jobs = [job(t, r) for t, r in zip(arrivals, reqs)]
    gaps = interarrival_series(jobs).values[:, 0].astype(np.int64)
    assert (arrivals[0] + np.cumsum(gaps)).tolist() == arrivals
    slot = data.draw(st.integers(max(1, arrivals[-1] // 10_000), 10**11))
    agg = aggregate_requests(jobs, slot).values.sum(axis=0)
    total = np.array(reqs).sum(axis=0)
    np.testing.assert_allclose(agg, total, rtol=1e-9, atol=1e-300)


def test_feature_vectors():
    (fv,) = feature_vectors([job(5, (0.1, 0.2, 0.3), p=4)])
    assert tuple(fv) == (0, 4, 0.1, 0.2, 0.3)
    fm = feature_matrix([job(10, p=1), job(30, p=2)])
    assert fm.shape == (2, 5)
    # each job carries its own interval
    assert fm[:, 0].tolist() == [0, 20] and fm[:, 1].tolist() == [1, 2]


def test_scaler_examples():
    x = np.array([2.0, 4.0, 6.0])
    assert apply(fit_scaler(x), x).tolist() == [0, 0.5, 1]
    c = np.array([5.0, 5.0])
    assert apply(fit_scaler(c), c).tolist() == [0, 0]


def test_scaler_fit_range():
    x = np.array([[0.0], [10.0], [100.0]])
    sc = fit_scaler(x, (0, 2))
    assert sc.hi.tolist() == [10.0]
    with pytest.raises(ValueError):
        fit_scaler(x, (2, 2))


def test_scaler_keeps_multiseries():
    ms = MultiSeries(np.array([[1.0, 2.0], [3.0, 2.0]]), ("a", "b"))
    out = apply(fit_scaler(ms), ms)
    assert isinstance(out, MultiSeries) and out.values.tolist() == [[0, 0], [1, 0]]


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(arrays(float, st.tuples(st.integers(2, 40), st.integers(1, 4)), elements=finite))
@settings(max_examples=80, deadline=None)
def test_scaler_round_trip_and_monotone(x):
    sc = fit_scaler(x)
    y = apply(sc, x)
    live = sc.span > 0
    back = invert(sc, y)
    scale = np.maximum(1.0, np.abs(x))
    assert np.all(np.abs(back - x)[:, live] <= 1e-12 * scale[:, live] * 1e3)
    for j in np.flatnonzero(live):
        order = np.argsort(x[:, j], kind="stable")
        assert np.all(np.diff(y[order, j]) >= 0)


def test_round_trip_1e12():
    x = np.random.default_rng(0).normal(size=(200, 3))
    sc = fit_scaler(x)
    np.testing.assert_allclose(invert(sc, apply(sc, x)), x, rtol=0, atol=1e-12)


def test_window_examples():
    v = np.arange(10.0)
    ds = window(v, 3)
    assert len(ds) == 7
    assert ds.targets[0, 0] == v[3]
    assert ds.inputs[0, :, 0].tolist() == [0, 1, 2]
    ds3 = window(np.ones((12, 3)), 4)
    assert ds3.inputs.shape[1:] == (4, 3)
    with pytest.raises(ValueError):
        window(np.arange(3.0), 3)


@given(st.integers(4, 60), st.integers(1, 3), st.data())
@settings(max_examples=40, deadline=None)
def test_window_slices_source(n, d, data):
    lookback = data.draw(st.integers(1, n - 1))
    v = np.random.default_rng(n).normal(size=(n, d))
    ds = window(v, lookback)
    for t in range(len(ds)):
        assert np.array_equal(ds.inputs[t], v[t:t + lookback])
        assert np.array_equal(ds.targets[t], v[t + lookback])


def test_split_is_chronological():
    ds = window(np.arange(20.0), 2)
    tr, va = ds.split(0.25)
    assert len(va) == 4 and len(tr) + len(va) == len(ds)
    assert tr.targets[-1, 0] < va.targets[0, 0]


def test_series_csv_round_trip():
    ms = MultiSeries(np.random.default_rng(1).random((5, 3)), ("cpu", "ram", "disk"))
    fh = io.StringIO()
    write_series_csv(ms, fh)
    assert fh.getvalue().startswith("cpu,ram,disk\n")
    fh.seek(0)
    back = read_series_csv(fh)
    assert back.names == ms.names and np.array_equal(back.values, ms.values)


def test_multiseries_rejects_nonfinite():
    with pytest.raises(ValueError):
        MultiSeries(np.array([1.0, np.nan]), ("x",))
