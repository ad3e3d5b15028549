import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmsplace import _kernels_py, kernels

try:
    from hmsplace import _kernels as compiled
except ImportError:
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled core not built")


@needs_compiled
@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 40), st.floats(-5, 50)), max_size=12),
       st.integers(0, 120))
def test_knapsack_tables_agree(items, cap):
    sizes = [s for s, _ in items]
    weights = [w for _, w in items]
    w1, s1 = kernels.knapsack_suffix(sizes, weights, cap, impl=compiled)
    w2, s2 = kernels.knapsack_suffix(sizes, weights, cap, impl=_kernels_py)
    np.testing.assert_array_equal(w1, w2)
    np.testing.assert_array_equal(s1, s2)


@needs_compiled
@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 30), max_size=12))
def test_subset_tables_agree(sizes):
    total = sum(sizes)
    np.testing.assert_array_equal(
        kernels.subset_min_count(sizes, total, impl=compiled),
        kernels.subset_min_count(sizes, total, impl=_kernels_py))


def test_subset_table_counts_fewest_items():
    tab = kernels.subset_min_count([2, 3, 5], 10)
    assert tab[0, 5] == 1
    assert tab[0, 10] == 3
    assert tab[0, 1] == kernels.UNREACHABLE
    assert tab[0, 0] == 0


def test_empty_inputs():
    w, s = kernels.knapsack_suffix([], [], 5)
    assert w.shape == (1, 6) and not w.any() and not s.any()
    assert kernels.subset_min_count([], 0).tolist() == [[0]]


def test_env_var_forces_fallback():
    code = "from hmsplace import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, HMSPLACE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip() == "python"
