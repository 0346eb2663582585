import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from daqp.core import QProblem, cholesky_upper, recover_primal, transform, update_linear_terms
from daqp.errors import DimensionMismatch, NotPositiveDefinite, NotSymmetric, TriviallyInfeasible


def random_pd(rng, n):
    X = rng.standard_normal((n, n))
    return X @ X.T + n * np.eye(n)


# ===== QPROBLEM =====

def test_problem_shapes(two_constraint):
    assert (two_constraint.n, two_constraint.m, two_constraint.me) == (2, 2, 0)
    assert not two_constraint.two_sided
    assert two_constraint.G.shape == (0, 2)
    assert_array_equal(two_constraint.b, [1.0, 0.3])


def test_problem_rejects_bad_input():
    with pytest.raises(NotSymmetric):
        QProblem(H=[[1.0, 1.0], [0.0, 1.0]], f=[0.0, 0.0], A=None, bu=None)
    with pytest.raises(DimensionMismatch):
        QProblem(H=np.eye(2), f=[0.0], A=None, bu=None)
    with pytest.raises(DimensionMismatch):
        QProblem(H=np.eye(2), f=[0.0, 0.0], A=[[1.0, 0.0]], bu=[1.0, 2.0])
    with pytest.raises(TriviallyInfeasible):
        QProblem(H=np.eye(1), f=[0.0], A=[[1.0]], bu=[0.0], bl=[1.0])


def test_objective(halfspace):
    assert halfspace.objective([0.5, 0.5]) == pytest.approx(-1.75)


def test_stacked(box_scalar):
    stacked = box_scalar.stacked()
    assert not stacked.two_sided
    assert_array_equal(stacked.A, [[1.0], [-1.0]])
    assert_array_equal(stacked.bu, [1.0, 1.0])


# ===== CHOLESKY =====

def test_cholesky_identity():
    R, Rinv = cholesky_upper(np.eye(3))
    assert_allclose(R, np.eye(3))
    assert_allclose(Rinv, np.eye(3))


def test_cholesky_hand_case():
    H = np.array([[4.0, 2.0], [2.0, 3.0]])
    R, Rinv = cholesky_upper(H)
    assert_allclose(R, [[2.0, 1.0], [0.0, np.sqrt(2.0)]], atol=1e-12)
    assert_allclose(R.T @ R, H, atol=1e-10)
    assert_allclose(Rinv @ R, np.eye(2), atol=1e-10)


def test_cholesky_pure_regularization():
    R, _ = cholesky_upper(np.zeros((1, 1)), reg=1.0)
    assert_allclose(R, [[1.0]])


def test_cholesky_not_positive_definite():
    with pytest.raises(NotPositiveDefinite):
        cholesky_upper(np.zeros((2, 2)))
    with pytest.raises(NotPositiveDefinite):
        cholesky_upper([[1.0, 2.0], [2.0, 1.0]])


# ===== TRANSFORM =====

def test_transform_identity_hessian(halfspace):
    ldp = transform(halfspace)
    assert_allclose(ldp.M, [[1.0, 1.0]])
    assert_allclose(ldp.v, [-2.0, -2.0])
    assert_allclose(ldp.d, [-3.0])
    assert ldp.epsilon_used == 0.0


def test_transform_general_hessian():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 2))
    H = np.array([[4.0, 2.0], [2.0, 3.0]])
    ldp = transform(QProblem(H=H, f=[1.0, -1.0], A=A, bu=np.ones(3)))
    assert_allclose(ldp.M @ ldp.R, A, atol=1e-10)


def test_transform_two_sided(box_scalar):
    ldp = transform(box_scalar)
    assert ldp.two_sided
    assert_allclose(ldp.d_upper, [-2.0])
    assert_allclose(ldp.d_lower, [4.0])


def test_transform_equality_block():
    qp = QProblem(H=np.eye(2), f=[1.0, 0.0], A=None, bu=None, G=[[1.0, 1.0]], h=[1.0])
    ldp = transform(qp)
    assert ldp.me == 1
    assert_allclose(ldp.N, [[1.0, 1.0]])
    assert_allclose(ldp.e, [2.0])


# ===== LINEAR TERM UPDATES =====

def test_update_same_terms_is_noop(two_constraint):
    ldp = transform(two_constraint)
    same = update_linear_terms(ldp, two_constraint.f, two_constraint.bu)
    assert_array_equal(same.v, ldp.v)
    assert_array_equal(same.d_upper, ldp.d_upper)
    assert same.M is ldp.M


def test_update_identity_hessian(halfspace):
    ldp = update_linear_terms(transform(halfspace), [0.0, 0.0], [1.0])
    assert_allclose(ldp.v, [0.0, 0.0])
    assert_allclose(ldp.d, [1.0])


def test_update_matches_transform():
    rng = np.random.default_rng(4)
    n, m = 5, 7
    qp = QProblem(H=random_pd(rng, n), f=rng.standard_normal(n), A=rng.standard_normal((m, n)),
                  bu=rng.standard_normal(m), bl=rng.standard_normal(m) - 3.0)
    f2 = qp.f + 0.1 * rng.standard_normal(n)
    ldp = update_linear_terms(transform(qp), f2, qp.bu, qp.bl)
    ref = transform(qp.with_linear_terms(f=f2))
    assert_allclose(ldp.d_upper, ref.d_upper, atol=1e-12)
    assert_allclose(ldp.d_lower, ref.d_lower, atol=1e-12)


def test_update_rejects_sidedness_change(two_constraint):
    ldp = transform(two_constraint)
    with pytest.raises(DimensionMismatch):
        update_linear_terms(ldp, two_constraint.f, two_constraint.bu, bl=[0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        update_linear_terms(ldp, [1.0], two_constraint.bu)


# ===== PRIMAL RECOVERY =====

def test_recover_unconstrained(halfspace):
    x = recover_primal(transform(halfspace), [], [], [])
    assert_allclose(x, [2.0, 2.0])


def test_recover_halfspace(halfspace):
    x = recover_primal(transform(halfspace), [1.5], [], [0])
    assert_allclose(x, [0.5, 0.5])


def test_recover_equality():
    qp = QProblem(H=np.eye(2), f=[0.0, 0.0], A=None, bu=None, G=[[1.0, 1.0]], h=[1.0])
    x = recover_primal(transform(qp), [], [-0.5], [])
    assert_allclose(x, [0.5, 0.5])


def test_recover_matches_dense_solve():
    rng = np.random.default_rng(8)
    for n in range(1, 9):
        H = random_pd(rng, n)
        f = rng.standard_normal(n)
        x = recover_primal(transform(QProblem(H=H, f=f, A=None, bu=None)), [], [], [])
        assert_allclose(x, -np.linalg.solve(H, f), atol=1e-8)
