import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dhls.errors import CapacityError, DimensionError, GridRangeError
from dhls.grid import Convention, GridSpec
from dhls.kernel import (
    Mode,
    dense_matrix,
    fast_operator,
    kernel_value,
    make_operator,
    pair_sum,
    quadratic_form,
    row_sum,
)

from oracles import brute_matrix, brute_pair_sum, centered_points, unit_points


@pytest.mark.parametrize("x,n,val", [((2,), 1, 0.5), ((1, 1), 2, 0.5), ((0,), 1, 0.0), ((0, 0, 0), 3, 0.0), ((3, 4), 2, 1 / 25)])
def test_kernel_value(x, n, val):
    assert kernel_value(x, n) == pytest.approx(val, abs=1e-15)


def test_dense_small_examples():
    np.testing.assert_array_equal(dense_matrix(GridSpec(1, 2)).matrix, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(dense_matrix(GridSpec(1, 3)).matrix, [[0, 1, 0.5], [1, 0, 1], [0.5, 1, 0]])
    A = dense_matrix(GridSpec(2, 2)).matrix
    for row in A:
        assert sorted(row) == [0, 0.5, 1, 1]


@pytest.mark.parametrize(
    "g, pts",
    [
        (GridSpec(2, 3), unit_points(2, 3)),
        (GridSpec(3, 2), unit_points(3, 2)),
        (GridSpec(2, 2, "centered"), centered_points(2, 2)),
        (GridSpec(4, 2), unit_points(4, 2)),
    ],
)
def test_dense_matches_brute(g, pts):
    A = dense_matrix(g).matrix
    np.testing.assert_allclose(A, brute_matrix(pts, g.dimension), rtol=1e-15, atol=0)
    np.testing.assert_array_equal(A, A.T)
    assert (np.diag(A) == 0).all()
    off = A[~np.eye(len(A), dtype=bool)]
    assert (off > 0).all()


def test_dense_limit():
    with pytest.raises(CapacityError):
        dense_matrix(GridSpec(2, 10), dense_limit=50)
    assert make_operator(GridSpec(2, 10), dense_limit=50).mode is Mode.FAST
    assert make_operator(GridSpec(2, 5), dense_limit=50).mode is Mode.DENSE


@pytest.mark.parametrize("mode", ["dense", "fast"])
def test_matvec_examples(mode):
    assert make_operator(GridSpec(1, 2), mode).matvec(np.ones(2)) == pytest.approx([1, 1], abs=1e-14)
    assert make_operator(GridSpec(1, 3), mode).matvec(np.ones(3)) == pytest.approx([1.5, 2, 1.5], abs=1e-14)
    assert make_operator(GridSpec(2, 2), mode).matvec(np.ones(4)) == pytest.approx([2.5] * 4, abs=1e-14)


@pytest.mark.parametrize("mode", ["dense", "fast"])
def test_matvec_dimension_error(mode):
    op = make_operator(GridSpec(2, 3), mode)
    with pytest.raises(DimensionError):
        op.matvec(np.ones(8))
    with pytest.raises(DimensionError):
        quadratic_form(op, np.ones(3), np.ones(9))


@pytest.mark.parametrize("n,N", [(1, N) for N in (1, 2, 5, 8)] + [(2, N) for N in (1, 3, 8)] + [(3, N) for N in (2, 5, 8)])
@pytest.mark.parametrize("conv", [Convention.UNIT, Convention.CENTERED])
def test_dense_fast_agreement(n, N, conv):
    g = GridSpec(n, N, conv)
    if g.num_points > 4096:
        pytest.skip("dense oracle too large")
    dense, fast = dense_matrix(g), fast_operator(g)
    rng = np.random.default_rng(1234)
    for _ in range(20):
        v = rng.standard_normal(g.num_points)
        v /= np.linalg.norm(v)
        ref = dense.matvec(v)
        assert np.linalg.norm(fast.matvec(v) - ref) <= 1e-10 * np.linalg.norm(ref)


def test_quadratic_form_examples():
    op2 = make_operator(GridSpec(1, 2))
    a = np.full(2, 2**-0.5)
    assert quadratic_form(op2, a, a) == pytest.approx(1.0, abs=1e-15)
    op3 = make_operator(GridSpec(1, 3))
    a = np.full(3, 3**-0.5)
    assert quadratic_form(op3, a, a) == pytest.approx(5 / 3, abs=1e-15)
    assert quadratic_form(op3, np.zeros(3), np.array([1.0, -2.0, 3.0])) == 0.0


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3), N=st.integers(2, 5), mode=st.sampled_from(["dense", "fast"]))
@settings(max_examples=40, deadline=None)
def test_quadratic_form_symmetric(seed, n, N, mode):
    op = make_operator(GridSpec(n, N), mode)
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, op.size))
    assert abs(quadratic_form(op, a, b) - quadratic_form(op, b, a)) <= 1e-12 * max(1.0, np.abs(a).sum() * np.abs(b).sum())


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3), N=st.integers(2, 5), mode=st.sampled_from(["dense", "fast"]))
@settings(max_examples=40, deadline=None)
def test_positivity(seed, n, N, mode):
    op = make_operator(GridSpec(n, N), mode)
    rng = np.random.default_rng(seed)
    v = np.zeros(op.size)
    k = rng.integers(2, op.size + 1)
    v[rng.choice(op.size, k, replace=False)] = rng.uniform(0.1, 1.0, k)
    assert (op.matvec(v) > 0).all()


@pytest.mark.parametrize("mode", ["dense", "fast"])
def test_positivity_single_entry(mode):
    # zero diagonal: a point mass is seen by every other point but not itself
    op = make_operator(GridSpec(2, 3), mode)
    for r in range(op.size):
        e = np.zeros(op.size)
        e[r] = 1.0
        out = op.matvec(e)
        assert abs(out[r]) < 1e-14
        assert (np.delete(out, r) > 0).all()


def test_row_sum_examples():
    assert row_sum(GridSpec(1, 3), (2,)) == 2.0
    assert row_sum(GridSpec(1, 3), (1,)) == 1.5
    for p in unit_points(2, 2):
        assert row_sum(GridSpec(2, 2), p) == 2.5
    with pytest.raises(GridRangeError):
        row_sum(GridSpec(1, 3), (4,))


@pytest.mark.parametrize("n,N,conv", [(1, 7, "unit"), (2, 4, "unit"), (3, 3, "unit"), (2, 2, "centered"), (1, 3, "centered")])
def test_sum_identity(n, N, conv):
    g = GridSpec(n, N, conv)
    pts = unit_points(n, N) if conv == "unit" else centered_points(n, N)
    brute = brute_pair_sum(pts, n)
    assert pair_sum(g) == pytest.approx(brute, rel=1e-14)
    for mode in ("dense", "fast"):
        assert make_operator(g, mode).matvec(np.ones(g.num_points)).sum() == pytest.approx(brute, rel=1e-12)


def test_dense_matvec_reproducible():
    op = make_operator(GridSpec(2, 9))
    v = np.random.default_rng(7).standard_normal(op.size)
    first = op.matvec(v)
    for _ in range(5):
        assert np.array_equal(op.matvec(v), first)
    fast = make_operator(GridSpec(2, 9), "fast")
    ref = fast.matvec(v)
    assert np.array_equal(fast.matvec(v), ref)
