"""Backend selection for the O(n^2) kernels.

The compiled extension is used when it was built; otherwise, or when
``WORKLOAD_LAB_PURE_PYTHON`` is set to a non-empty value, the numpy versions
are used. Both expose ``centroid_linkage`` and ``dissimilarity_sums``.
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

if _ckernels is not None and not os.environ.get("WORKLOAD_LAB_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"


def available() -> list[str]:
    return sorted(_BACKENDS)


def get(name: str | None = None):
    """Return the kernel module for ``name`` (default: the active backend)."""
    name = name or BACKEND
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available; have {available()}") from None


def centroid_linkage(ls, weights, backend: str | None = None):
    return get(backend).centroid_linkage(ls, weights)


def dissimilarity_sums(x, labels, k: int, mode: int, eps: float = 0.0, backend: str | None = None):
    return get(backend).dissimilarity_sums(x, labels, k, mode, eps)
