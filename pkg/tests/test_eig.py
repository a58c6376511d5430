import numpy as np
import pytest

from dhls.eig import (
    abs_map,
    operator_norm,
    power_iteration,
    second_eigenvalue,
    sign_normalize,
    spectral_report,
)
from dhls.errors import ContractError
from dhls.grid import GridSpec
from dhls.kernel import dense_matrix, make_operator
from dhls.maxprinciple import build_decay_system
from dhls.optimizer import solve_optimizer

from oracles import cubic_root, top_eigpair


def test_exchange_matrix_one_iteration():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    res = power_iteration(lambda v: A @ v, 2, shift=1.0)
    assert res.converged and res.iterations == 1
    assert res.eigenvalue == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(res.vector, [2**-0.5, 2**-0.5], atol=1e-15)


def test_unshifted_exchange_matrix_from_skewed_start_does_not_converge():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    res = power_iteration(lambda v: A @ v, 2, shift=0.0, start=np.array([1.0, 0.2]), max_iter=200)
    assert not res.converged
    assert res.iterations == 200


def test_n1_N3_cubic_root():
    op = make_operator(GridSpec(1, 3))
    res = power_iteration(op, 3)
    assert res.converged
    assert res.eigenvalue == pytest.approx(cubic_root(), abs=1e-10)
    lam, v = top_eigpair(op.matrix)
    np.testing.assert_allclose(res.vector, v, atol=1e-9)


def test_n2_N2_constant_vector():
    res = power_iteration(make_operator(GridSpec(2, 2)), 4)
    assert res.eigenvalue == pytest.approx(2.5, abs=1e-12)
    np.testing.assert_allclose(res.vector, [0.5] * 4, atol=1e-12)


@pytest.mark.parametrize("n,N", [(1, N) for N in range(2, 40, 3)] + [(2, N) for N in range(2, 12)] + [(3, N) for N in range(2, 7)])
def test_against_dense_eigensolver(n, N):
    op = make_operator(GridSpec(n, N))
    res = power_iteration(op, op.size)
    lam, v = top_eigpair(op.matrix)
    assert res.converged
    assert abs(res.eigenvalue - lam) <= 1e-8 * lam
    assert np.max(np.abs(res.vector - v)) <= 1e-7
    assert res.vector.min() > 0
    assert np.linalg.norm(res.vector) == pytest.approx(1.0, abs=1e-12)
    assert res.residual <= 1e-10 * max(lam, 1.0)


@pytest.mark.parametrize("g", [GridSpec(1, 17), GridSpec(2, 6), GridSpec(3, 3)])
def test_shift_invariance(g):
    op = make_operator(g)
    a = power_iteration(op, op.size, shift=0.5)
    b = power_iteration(op, op.size, shift=2.0)
    assert np.max(np.abs(a.vector - b.vector)) <= 1e-8


def test_bad_arguments():
    f = lambda v: v  # noqa: E731
    with pytest.raises(ContractError):
        power_iteration(f, 3, shift=-1.0)
    with pytest.raises(ContractError):
        power_iteration(f, 3, tol=0.0)
    with pytest.raises(ContractError):
        power_iteration(f, 3, start=np.ones(4))


def test_second_eigenvalue_exchange():
    op = make_operator(GridSpec(1, 2))
    perron = power_iteration(op, 2)
    second = second_eigenvalue(op, perron)
    assert second.eigenvalue == pytest.approx(-1.0, abs=1e-12)
    rep = spectral_report(op, perron)
    assert rep.mu_L == pytest.approx(1.0) and rep.mu_L_minus_1 == pytest.approx(1.0)


@pytest.mark.parametrize("g", [GridSpec(1, 3), GridSpec(2, 2), GridSpec(1, 20), GridSpec(2, 5), GridSpec(3, 3)])
def test_second_eigenvalue_against_dense(g):
    op = make_operator(g)
    w = np.linalg.eigvalsh(op.matrix)
    perron = power_iteration(op, op.size)
    second = second_eigenvalue(op, perron)
    assert second.converged
    assert second.eigenvalue == pytest.approx(w[-2], abs=1e-8)
    rep = spectral_report(op, perron)
    mags = np.sort(np.abs(w))
    assert rep.mu_L == pytest.approx(mags[-1] ** 2, rel=1e-10)
    assert rep.mu_L_minus_1 == pytest.approx(mags[-2] ** 2, rel=1e-8)


def test_n1_N3_second_eigenvalue_is_middle_root():
    # x^3 - 2.25 x - 1 = (x + 0.5)(x^2 - 0.5 x - 2)
    op = make_operator(GridSpec(1, 3))
    second = second_eigenvalue(op, power_iteration(op, 3))
    assert second.eigenvalue == pytest.approx(-0.5, abs=1e-10)


def test_n2_N2_spectral_report():
    op = make_operator(GridSpec(2, 2))
    np.testing.assert_allclose(np.linalg.eigvalsh(op.matrix), [-1.5, -0.5, -0.5, 2.5], atol=1e-14)
    rep = spectral_report(op, power_iteration(op, 4))
    assert rep.mu_L == pytest.approx(6.25)
    assert rep.mu_L_minus_1 == pytest.approx(2.25)
    assert rep.gap_ratio == pytest.approx(0.36)


def test_abs_map():
    np.testing.assert_array_equal(abs_map(np.array([1.0, -2.0])), [1.0, 2.0])
    v = np.array([0.3, 0.0, 2.0])
    np.testing.assert_array_equal(abs_map(v), v)
    w = np.random.default_rng(0).standard_normal(50)
    assert np.linalg.norm(abs_map(w)) == pytest.approx(np.linalg.norm(w), rel=1e-15)


@pytest.mark.parametrize("g", [GridSpec(1, 12), GridSpec(2, 5), GridSpec(3, 2)])
def test_abs_map_raises_quadratic_form_of_square(g):
    A = dense_matrix(g).matrix
    C = A @ A
    rng = np.random.default_rng(99)
    for _ in range(50):
        v = rng.standard_normal(g.num_points)
        if (v > 0).all() or (v < 0).all():
            continue
        v /= np.linalg.norm(v)
        t = abs_map(v)
        assert t @ C @ t > v @ C @ v


def test_sign_normalize():
    np.testing.assert_array_equal(sign_normalize(np.array([-1.0, -2.0])), [1.0, 2.0])
    np.testing.assert_array_equal(sign_normalize(np.array([1.0, -3.0, 2.0])), [-1.0, 3.0, -2.0])


def test_operator_norm_symmetric_kernel_is_lambda():
    op = make_operator(GridSpec(2, 4))
    lam = power_iteration(op, op.size).eigenvalue
    assert operator_norm(op, op, op.size) == pytest.approx(lam, rel=1e-9)


def test_operator_norm_zero():
    assert operator_norm(lambda v: 0 * v, lambda v: 0 * v, 5) == 0.0


def test_operator_norm_decay_matrix_below_one():
    opt = solve_optimizer(GridSpec(1, 4, "centered"), 1e-12)
    A = build_decay_system(opt).matrix
    est = operator_norm(lambda v: A @ v, lambda v: A.T @ v, A.shape[0])
    ref = np.linalg.svd(A, compute_uv=False)[0]
    assert est == pytest.approx(ref, rel=1e-9)
    assert est < 1


def test_operator_norm_nonsymmetric():
    rng = np.random.default_rng(3)
    M = rng.uniform(0, 1, (30, 20))
    est = operator_norm(lambda v: M @ v, lambda v: M.T @ v, 20)
    assert est == pytest.approx(np.linalg.norm(M, 2), rel=1e-9)
