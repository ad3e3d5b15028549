"""DP kernel selection: compiled core when built, numpy fallback otherwise.

Set ``HMSPLACE_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _kernels_py

UNREACHABLE = _kernels_py.UNREACHABLE

_impl = _kernels_py
BACKEND = "python"
if not os.environ.get("HMSPLACE_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass


def knapsack_suffix(sizes, weights, capacity, impl=None):
    impl = impl or _impl
    return impl.knapsack_suffix(
        np.ascontiguousarray(sizes, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.float64),
        int(capacity),
    )


def subset_min_count(sizes, total, impl=None):
    impl = impl or _impl
    return impl.subset_min_count(np.ascontiguousarray(sizes, dtype=np.int64), int(total))
