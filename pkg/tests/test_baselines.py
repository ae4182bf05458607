import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flexkrylov.baselines import (
    FistaConfig,
    IrnConfig,
    cgls,
    fista_objective,
    run_fista,
    run_irn,
    run_pirn,
    soft_threshold,
)
from flexkrylov.linop import ConfigurationError, MatrixOperator
from flexkrylov.transforms import HaarTransform
from flexkrylov.weights import WeightPolicy


def huber(t, tau):
    a = np.abs(t)
    return np.where(a <= tau, a * a / (2 * tau), a - tau / 2)


def test_soft_threshold_examples():
    np.testing.assert_allclose(soft_threshold([3.0, -0.5, -2.0, 0.0], 1.0), [2.0, 0.0, -1.0, 0.0])


@settings(max_examples=50, deadline=None)
@given(t=st.floats(-1e3, 1e3), g=st.floats(0, 1e2))
def test_soft_threshold_is_prox(t, g):
    # prox of g|.|: minimizer of 1/2 (x - t)^2 + g |x|
    x = float(soft_threshold(t, g))
    obj = lambda z: 0.5 * (z - t) ** 2 + g * abs(z)
    for dz in (-1e-3, 1e-3):
        assert obj(x) <= obj(x + dz) + 1e-9


def test_cgls_matches_tikhonov(rng):
    A = rng.standard_normal((20, 10))
    b = rng.standard_normal(20)
    d = rng.uniform(0.5, 2.0, 10)
    x, ok = cgls(MatrixOperator(A), b, maxiter=50, tol=1e-13, lam=0.3, d=d)
    assert ok
    oracle = np.linalg.solve(A.T @ A + 0.3 * np.diag(d ** 2), A.T @ b)
    np.testing.assert_allclose(x, oracle, rtol=1e-9)


def test_irn_config_validation():
    with pytest.raises(ConfigurationError):
        IrnConfig(outer=0)
    with pytest.raises(ConfigurationError):
        IrnConfig(lam=-1.0)
    with pytest.raises(ConfigurationError):
        IrnConfig(inner_solver="lu")
    with pytest.raises(ConfigurationError):
        FistaConfig(maxiter=0)


@pytest.mark.parametrize("runner", [run_irn, run_pirn])
def test_identity_quadratic_closed_form(runner):
    b = np.array([1.0, -2.0, 0.5])
    cfg = IrnConfig(outer=3, inner=10, lam=0.5, weights=WeightPolicy(p=2))
    run = runner(np.eye(3), b, cfg)
    np.testing.assert_allclose(run.x, b / 1.5, rtol=1e-12)


@pytest.mark.parametrize("runner", [run_irn, run_pirn])
def test_identity_l1_shrinks_like_soft_threshold(runner):
    b = np.array([1.0, 0.001])
    w = WeightPolicy(p=1, tau1=0.01, tau2=0.01, clip=True)
    run = runner(np.eye(2), b, IrnConfig(outer=60, inner=5, lam=0.1, weights=w, inner_solver="exact"))
    np.testing.assert_allclose(run.x, [0.9, 0.001 / 11], rtol=1e-8)


def test_irn_pirn_agree_with_exact_inner_solves(rng):
    A = rng.standard_normal((25, 15))
    b = rng.standard_normal(25)
    for weights in (WeightPolicy(p=1), WeightPolicy(p=1.5, tau1_rel=0.05, clip=True)):
        cfg = IrnConfig(outer=6, lam=0.05, weights=weights, inner_solver="exact")
        np.testing.assert_allclose(run_irn(A, b, cfg).x, run_pirn(A, b, cfg).x, rtol=1e-9, atol=1e-12)


def test_irn_pirn_agree_at_p2_with_cgls(rng):
    A = rng.standard_normal((25, 15))
    b = rng.standard_normal(25)
    cfg = IrnConfig(outer=2, inner=200, inner_tol=1e-14, lam=0.05, weights=WeightPolicy(p=2))
    np.testing.assert_allclose(run_irn(A, b, cfg).x, run_pirn(A, b, cfg).x, rtol=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_irn_is_a_huber_majorize_minimize_scheme(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((20, 10))
    b = rng.standard_normal(20)
    lam, tau = 0.5, 0.05
    w = WeightPolicy(p=1, tau1=tau, tau2=tau, clip=True)

    def phi(x):
        return float(np.sum((A @ x - b) ** 2) + 2 * lam * np.sum(huber(x, tau)))

    values = [phi(run_irn(A, b, IrnConfig(outer=k, lam=lam, weights=w, inner_solver="exact")).x) for k in range(1, 9)]
    assert np.all(np.diff(values) <= 1e-10 * values[0])


def test_irn_records_per_outer_iteration(rng):
    A = rng.standard_normal((20, 10))
    xt = rng.standard_normal(10)
    run = run_irn(A, A @ xt, IrnConfig(outer=4, inner=3, x_true=xt))
    assert run.iterations == 4
    np.testing.assert_array_equal(run.column("k"), [1, 2, 3, 4])
    assert np.all(np.diff(run.column("matvecs")) > 0)
    assert isinstance(run.info["inner_converged"], bool)


def test_fista_identity_fixed_point():
    b = np.array([3.0, -0.2, 1.0])
    run = run_fista(np.eye(3), b, FistaConfig(lam=0.5, maxiter=20))
    assert run.info["step"] == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(run.x, soft_threshold(b, 0.5), atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_fista_step_from_norm_estimate(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((30, 20))
    run = run_fista(A, rng.standard_normal(30), FistaConfig(lam=0.1, maxiter=2))
    exact = 1.0 / np.linalg.norm(A, 2) ** 2
    assert exact * (1 - 1e-12) <= run.info["step"] <= 1.05 * exact
    assert run.info["setup_matvecs"] == 60


@pytest.mark.parametrize("seed", range(3))
def test_fista_objective_approaches_ista_limit(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((30, 20))
    b = rng.standard_normal(30)
    lam = 0.5
    op = MatrixOperator(A)
    run = run_fista(A, b, FistaConfig(lam=lam, maxiter=200))
    step = 1.0 / np.linalg.norm(A, 2) ** 2
    x = np.zeros(20)
    for _ in range(20000):
        x = soft_threshold(x - step * A.T @ (A @ x - b), lam * step)
    f_ref = fista_objective(op, b, x, lam)
    assert run.info["objective"] <= f_ref + 1e-6
    assert run.info["objective"] <= fista_objective(op, b, np.zeros(20), lam)


def test_fista_in_transform_domain(rng):
    psi = HaarTransform(16, 2)
    A = rng.standard_normal((24, 16))
    s = np.zeros(16)
    s[[0, 5]] = [1.0, -2.0]
    xt = psi.apply_adjoint(s)
    run = run_fista(A, A @ xt, FistaConfig(lam=1e-3, maxiter=500, transform=psi, x_true=xt))
    assert run.best_rel_err < 1e-2
    assert run.column("matvecs")[-1] == 1000
