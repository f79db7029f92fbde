import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xadg import kernels
from xadg.af import Framework, Label, grounded_labelling

LABEL_CODE = {Label.IN: kernels.IN, Label.OUT: kernels.OUT, Label.UNDEC: kernels.UNDEC}


@st.composite
def numeric_columns(draw):
    n = draw(st.integers(1, 60))
    k = draw(st.integers(1, 4))
    x = draw(st.lists(st.integers(-5, 5).map(float), min_size=n, max_size=n))
    y = draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    return np.array(x), np.array(y, dtype=np.int64), k


@st.composite
def categorical_columns(draw):
    n = draw(st.integers(1, 60))
    k = draw(st.integers(1, 4))
    m = draw(st.integers(1, 6))
    c = draw(st.lists(st.integers(0, m - 1), min_size=n, max_size=n))
    y = draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    return np.array(c, dtype=np.int64), np.array(y, dtype=np.int64), m, k


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 9))
    pairs = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n))
    rows = draw(st.integers(1, 12))
    active = draw(st.lists(st.lists(st.booleans(), min_size=n, max_size=n), min_size=rows, max_size=rows))
    return n, sorted(pairs), np.array(active, dtype=bool)


def brute_numeric(x, y, k):
    best, thr = -np.inf, np.nan
    vals = np.unique(x)
    for a, b in zip(vals, vals[1:]):
        t = (a + b) / 2
        m = x < t
        s = sum(np.bincount(y[side], minlength=k).astype(np.int64) @ np.bincount(y[side], minlength=k) / side.sum()
                for side in (m, ~m))
        if s > best + 1e-12:
            best, thr = s, t
    return best, thr


@settings(max_examples=150, deadline=None)
@given(numeric_columns())
def test_numeric_split_parity(col):
    x, y, k = col
    a = kernels.numeric_split_loop(x, y, k)
    b = kernels.numeric_split_numpy(x, y, k)
    assert a[0] == b[0]
    assert (np.isnan(a[1]) and np.isnan(b[1])) or a[1] == b[1]
    ref = brute_numeric(x, y, k)
    if np.isfinite(ref[0]):
        assert a[0] == pytest.approx(ref[0])
    else:
        assert a[0] == -np.inf


@settings(max_examples=150, deadline=None)
@given(categorical_columns())
def test_categorical_split_parity(col):
    c, y, m, k = col
    a = kernels.categorical_split_loop(c, y, m, k)
    b = kernels.categorical_split_numpy(c, y, m, k)
    assert a[0] == b[0] and int(a[1]) == int(b[1])


@settings(max_examples=150, deadline=None)
@given(graphs())
def test_grounded_batch_parity_and_oracle(g):
    n, pairs, active = g
    indptr, targets = kernels.to_csr(n, pairs)
    a = kernels.grounded_batch_loop(active, indptr, targets)
    b = kernels.grounded_batch_numpy(active, indptr, targets)
    assert np.array_equal(a, b)
    af = Framework(tuple(range(n)), frozenset(pairs))
    for r, row in enumerate(active):
        sub = af.restrict([i for i in range(n) if row[i]])
        lab = grounded_labelling(sub)
        want = [LABEL_CODE[lab[i]] if row[i] else kernels.INACTIVE for i in range(n)]
        assert a[r].tolist() == want


def test_to_csr():
    indptr, targets = kernels.to_csr(3, [(0, 2), (0, 1), (2, 0), (0, 1)])
    assert indptr.tolist() == [0, 2, 2, 3] and targets.tolist() == [1, 2, 0]


def test_dispatch_names_point_at_one_backend():
    from xadg._accel import USE_NUMBA, backend

    assert backend() == ("numba" if USE_NUMBA else "numpy")
    chosen = kernels.grounded_batch is kernels.grounded_batch_loop
    assert chosen == USE_NUMBA


def test_numpy_fallback_in_subprocess():
    import os
    import subprocess
    import sys

    code = "from xadg import kernels, _accel; print(_accel.backend(), kernels.grounded_batch is kernels.grounded_batch_numpy)"
    env = dict(os.environ, XADG_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]
