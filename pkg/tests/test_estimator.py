import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from tricov.estimator import (
    CovarianceSurface,
    correlation_surface,
    empirical_covariance,
    empirical_covariances,
    estimate,
    mirror_query,
    smooth_covariance,
    std_curve,
)
from tricov.grid import TriangleGrid, make_equidistant_grid, triangle_eval_grid
from tricov.processes import OUProcess, add_noise, ou_kernel
from tricov.rng import RngSpec
from tricov.weights import SmootherConfig

from oracles import ou_gamma

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def design_surface(p, values):
    evals = triangle_eval_grid(make_equidistant_grid(p))
    values = np.asarray(values, dtype=float)
    return CovarianceSurface(evals, values, np.flatnonzero(np.isnan(values)))


def test_empirical_covariance_two_curves():
    z = empirical_covariance(np.array([[0.0, 0.0], [2.0, 2.0]])).z
    assert np.array_equal(z, [[2.0, 2.0], [2.0, 2.0]])


def test_empirical_covariance_constant_curves():
    z = empirical_covariance(np.full((5, 4), 3.7)).z
    np.testing.assert_allclose(z, 0.0, atol=1e-12)


def test_empirical_covariance_matches_definition():
    y = np.random.default_rng(0).normal(size=(30, 6))
    n = y.shape[0]
    ybar = y.mean(axis=0)
    ref = np.array([[(y[:, j] * y[:, k]).sum() - n * ybar[j] * ybar[k] for k in range(6)] for j in range(6)]) / (n - 1)
    np.testing.assert_allclose(empirical_covariance(y).z, ref, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(hnp.arrays(float, hnp.array_shapes(min_dims=2, max_dims=2, min_side=2, max_side=8), elements=finite))
def test_empirical_covariance_exactly_symmetric(y):
    z = empirical_covariance(y).z
    assert np.array_equal(z, z.T)
    assert np.all(np.diag(z) >= -1e-12 * max(1.0, np.abs(y).max() ** 2))


@settings(max_examples=30, deadline=None)
@given(
    hnp.arrays(float, (6, 4), elements=st.floats(-5, 5)),
    hnp.arrays(float, (4,), elements=st.floats(-100, 100)),
)
def test_empirical_covariance_mean_shift_invariant(y, c):
    np.testing.assert_allclose(empirical_covariance(y + c).z, empirical_covariance(y).z, atol=1e-10)


def test_empirical_covariances_batched():
    stack = np.random.default_rng(1).normal(size=(3, 10, 5))
    out = empirical_covariances(stack)
    for r in range(3):
        np.testing.assert_allclose(out[r], empirical_covariance(stack[r]).z, atol=1e-14)


@pytest.mark.parametrize("shape", [(1, 4), (5, 1), (5,)])
def test_sample_shape_errors(shape):
    with pytest.raises(ValueError):
        empirical_covariance(np.zeros(shape))


def test_nonfinite_samples_rejected():
    y = np.zeros((4, 3))
    y[1, 2] = np.nan
    with pytest.raises(ValueError):
        empirical_covariance(y)


def test_estimate_dimension_mismatch():
    with pytest.raises(ValueError):
        estimate(np.zeros((5, 4)), make_equidistant_grid(5), SmootherConfig(1, 0.5))


@pytest.mark.parametrize("m", [0, 1, 2])
def test_smooth_covariance_reproduces_polynomials(m):
    g = make_equidistant_grid(30)
    xs = g.points
    q = lambda x, y: 0.4 - 1.3 * x * (m >= 1) + 0.7 * y * (m >= 1) + 2.0 * x * y * (m >= 2) - y**2 * (m >= 2)  # noqa: E731
    surf = smooth_covariance(q(xs[:, None], xs[None, :]), g, SmootherConfig(m, 0.3))
    np.testing.assert_allclose(surf.values, q(surf.evals.x, surf.evals.y), atol=1e-7)


def test_estimate_ignores_diagonal_of_z():
    g = make_equidistant_grid(12)
    z = np.ones((12, 12))
    z2 = z + np.diag(np.arange(12.0) * 100)
    a = smooth_covariance(z, g, SmootherConfig(1, 0.4))
    b = smooth_covariance(z2, g, SmootherConfig(1, 0.4))
    assert np.array_equal(a.values, b.values)
    c = smooth_covariance(z2, g, SmootherConfig(1, 0.4, pair_domain="offdiag"))
    np.testing.assert_allclose(c.values, 1.0, atol=1e-12)


def test_estimate_linear_in_z():
    rng = np.random.default_rng(3)
    g = make_equidistant_grid(15)
    cfg = SmootherConfig(1, 0.35)
    z1, z2 = rng.normal(size=(2, 15, 15))
    lhs = smooth_covariance(2.5 * z1 - 0.7 * z2, g, cfg).values
    rhs = 2.5 * smooth_covariance(z1, g, cfg).values - 0.7 * smooth_covariance(z2, g, cfg).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_estimate_mean_shift_invariance():
    g = make_equidistant_grid(20)
    y = OUProcess().simulate(60, g, RngSpec(5))
    cfg = SmootherConfig(1, 0.3)
    base = estimate(y, g, cfg).values
    c = np.random.default_rng(9).uniform(-1e3, 1e3, size=20)
    np.testing.assert_allclose(estimate(y + c, g, cfg).values, base, atol=1e-10, rtol=0)


def test_ou_pipeline_example():
    # n=100, p=40, sigma_eps=0.75, h=0.3, m=1
    g = make_equidistant_grid(40)
    rng = RngSpec(7)
    y = add_noise(OUProcess(3.0, 2.0).simulate(100, g, rng), 0.75, rng)
    surf = estimate(y, g, SmootherConfig(1, 0.3))
    assert surf.holes.size == 0
    err = np.max(np.abs(surf.values - ou_kernel(surf.evals.x, surf.evals.y)))
    assert np.isfinite(err) and err < 0.5
    # the raw diagonal carries the noise variance, the smoothed one does not
    diag = surf.evals.diagonal_mask()
    raw = np.diag(empirical_covariance(y).z)
    truth = ou_kernel(g.points, g.points)
    assert np.mean(raw - truth) > 0.4
    assert abs(np.mean(surf.values[diag] - truth)) < 0.15


def test_mirror_query():
    surf = design_surface(4, np.arange(10.0))
    assert mirror_query(surf, 0.625, 0.125) == mirror_query(surf, 0.125, 0.625)
    assert surf(0.375, 0.375) == surf.values[surf.index_of(0.375, 0.375)]
    with pytest.raises(KeyError):
        mirror_query(surf, 0.33, 0.77)


def test_to_matrix_symmetric():
    surf = design_surface(5, np.random.default_rng(0).normal(size=15))
    mat = surf.to_matrix()
    assert np.array_equal(mat, mat.T)


def test_std_curve_zero_surface():
    curve = std_curve(design_surface(6, np.zeros(21)))
    assert np.array_equal(curve.sd, np.zeros(6))
    assert curve.n_clamped == 0


def test_std_curve_clamps_negative_variance():
    vals = np.ones(3)
    vals[0] = -1e-4
    curve = std_curve(design_surface(2, vals))
    assert curve.sd[0] == 0.0 and curve.clamped[0]
    assert curve.n_clamped == 1
    assert curve.sd[1] == 1.0


def test_ou_true_kernel_reference_values():
    assert ou_kernel(1.0, 1.0) == pytest.approx(0.665014, abs=5e-7)
    assert np.sqrt(ou_kernel(1.0, 1.0)) == pytest.approx(0.815484, abs=5e-7)
    # recomputed from the kernel formula
    rho = ou_gamma(0.5, 1.0) / np.sqrt(ou_gamma(0.5, 0.5) * ou_gamma(1.0, 1.0))
    assert rho == pytest.approx(0.2177748, abs=5e-7)


def test_correlation_of_true_ou_kernel():
    pts = np.array([[0.5, 0.5], [0.5, 1.0], [1.0, 1.0]])
    evals = TriangleGrid(pts)
    surf = CovarianceSurface(evals, ou_kernel(evals.x, evals.y), np.array([], dtype=int))
    rho = correlation_surface(surf)
    assert rho(0.5, 1.0) == pytest.approx(0.2177748, abs=5e-7)
    assert rho(0.5, 0.5) == 1.0 and rho(1.0, 1.0) == 1.0


def test_correlation_rank_one_kernel():
    g = make_equidistant_grid(8)
    evals = triangle_eval_grid(g)
    v = lambda t: 0.5 + t  # noqa: E731
    surf = CovarianceSurface(evals, v(evals.x) * v(evals.y), np.array([], dtype=int))
    np.testing.assert_allclose(correlation_surface(surf).values, 1.0, atol=1e-14)


def test_correlation_floor_creates_holes():
    g = make_equidistant_grid(3)
    evals = triangle_eval_grid(g)
    vals = np.array([0.0, 0.1, 0.1, 1.0, 0.5, 1.0])
    rho = correlation_surface(CovarianceSurface(evals, vals, np.array([], dtype=int)))
    # the first design point has zero variance
    assert set(rho.holes.tolist()) == {0, 1, 2}
    assert rho.values[3] == 1.0 and rho.values[4] == pytest.approx(0.5)


@settings(max_examples=25, deadline=None)
@given(hnp.arrays(float, (10,), elements=st.floats(-3, 3)))
def test_correlation_bounded(vals):
    rho = correlation_surface(design_surface(4, vals))
    ok = ~np.isnan(rho.values)
    assert np.all(np.abs(rho.values[ok]) <= 1.0)
