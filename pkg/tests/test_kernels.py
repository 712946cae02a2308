import os

import numpy as np
import pytest

import oracles
from workload_lab import kernels


def test_python_backend_always_available():
    assert "python" in kernels.available()
    assert kernels.BACKEND in kernels.available()


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get("fortran")


@pytest.mark.parametrize("seed", range(6))
def test_linkage_matches_oracle(backend, seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(2, 60)), int(rng.integers(1, 5))
    cents = rng.normal(size=(n, d))
    w = rng.integers(1, 6, size=n).astype(float)
    pairs, dists = kernels.centroid_linkage(cents * w[:, None], w, backend=backend)
    o_pairs, o_dists, _ = oracles.agglomerate(cents, w)
    assert [tuple(p) for p in pairs.tolist()] == o_pairs
    np.testing.assert_allclose(dists, o_dists, rtol=1e-10, atol=1e-12)


def test_linkage_tie_break(backend):
    # equal gaps everywhere: smallest id pair wins each time
    pairs, dists = kernels.centroid_linkage(np.array([[0.0], [1.0], [2.0], [3.0]]), np.ones(4),
                                            backend=backend)
    assert pairs[0].tolist() == [0, 1]
    assert pairs[1].tolist() == [2, 3]


@pytest.mark.skipif(len(kernels.available()) < 2, reason="compiled kernels not built")
@pytest.mark.parametrize("seed", range(4))
def test_backends_agree(seed):
    rng = np.random.default_rng(100 + seed)
    n = 300
    ls = rng.random((n, 4))
    w = rng.integers(1, 4, size=n).astype(float)
    a = kernels.centroid_linkage(ls, w, backend="python")
    b = kernels.centroid_linkage(ls, w, backend="cython")
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])
    labels = rng.integers(0, 5, size=n)
    for mode in (0, 1):
        x = rng.integers(0, 4, size=(n, 3)).astype(float) if mode else ls
        sa = kernels.dissimilarity_sums(x, labels, 5, mode, backend="python")
        sb = kernels.dissimilarity_sums(x, labels, 5, mode, backend="cython")
        np.testing.assert_allclose(sa, sb, rtol=1e-12, atol=1e-12)


def test_dissimilarity_sums_brute_force(backend, rng):
    x = rng.random((40, 3))
    labels = rng.integers(0, 3, size=40)
    out = kernels.dissimilarity_sums(x, labels, 3, 0, backend=backend)
    for i in range(40):
        for c in range(3):
            expect = sum(np.linalg.norm(x[i] - x[j]) for j in range(40) if labels[j] == c)
            assert out[i, c] == pytest.approx(expect, rel=1e-12, abs=1e-12)
    q = np.floor(x * 4)
    counts = kernels.dissimilarity_sums(q, labels, 3, 1, backend=backend)
    assert counts[0, labels[0]] == sum(np.count_nonzero(q[0] != q[j]) for j in range(40) if labels[j] == labels[0])


def test_pure_python_switch():
    import subprocess
    import sys
    env = dict(os.environ, WORKLOAD_LAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from workload_lab import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
