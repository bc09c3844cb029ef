import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resistive_sift.kernels import _geometry
from resistive_sift.network import Smoother1DSpec, Smoother2DSpec, assemble
from resistive_sift.solver import (SolveConfig, SolveFailure, conjugate_gradient, discrete_energy,
                                   filter_image, impulse_response, solve)


def dense(spec, v):
    return np.linalg.solve(assemble(spec).matrix.toarray(), np.ravel(v)).reshape(np.shape(v))


def test_constant_and_zero_inputs():
    op = assemble(Smoother2DSpec(10, 12, 36))
    u, _ = solve(op, np.full((10, 12), 5.0))
    np.testing.assert_allclose(u, 5.0, atol=1e-8)
    u, report = solve(op, np.zeros((10, 12)))
    assert not u.any() and report.relative_residual == 0


def test_impulse_matches_dense_inverse():
    spec = Smoother1DSpec(45, 36)
    v = np.zeros(45)
    v[22] = 1.0
    u, report = solve(assemble(spec), v)
    assert report.method == "direct_banded"
    assert np.abs(u - dense(spec, v)).max() < 1e-8


def test_filter_random_16x16_matches_dense():
    img = np.random.default_rng(2).uniform(0, 255, (16, 16))
    out = filter_image(img, 4.0)
    assert np.abs(out - dense(Smoother2DSpec(16, 16, 4.0), img)).max() < 1e-8 * 255


def test_filter_identities():
    img = np.random.default_rng(3).uniform(0, 255, (9, 11))
    np.testing.assert_array_equal(filter_image(img, 0.0), img)
    np.testing.assert_allclose(filter_image(np.full((64, 64), 128.0), 36), 128.0, atol=1e-6)
    with pytest.raises(ValueError):
        filter_image(img, 1.0, Smoother2DSpec(9, 10, 1.0))
    with pytest.raises(ValueError):
        filter_image(np.full((9, 9), np.nan), 1.0)


@pytest.mark.parametrize("spec", [Smoother1DSpec(30, 20, "periodic"), Smoother1DSpec(30, 20, "truncate"),
                                  Smoother2DSpec(8, 9, 20), Smoother2DSpec(8, 9, 20, "axis_only", "periodic")])
@pytest.mark.parametrize("method", ["direct_banded", "iterative_cg"])
@pytest.mark.parametrize("pre", ["none", "jacobi"])
def test_methods_agree_with_dense(spec, method, pre):
    v = np.random.default_rng(4).normal(size=spec.shape)
    u, report = solve(assemble(spec), v, SolveConfig(method=method, tolerance=1e-12, preconditioner=pre))
    assert u.shape == v.shape
    assert np.abs(u - dense(spec, v)).max() < 1e-8
    assert report.relative_residual <= 1e-12


def test_cg_failure_carries_best_iterate():
    op = assemble(Smoother2DSpec(20, 20, 100))
    v = np.random.default_rng(5).normal(size=400)
    with pytest.raises(SolveFailure) as info:
        solve(op, v, SolveConfig(method="iterative_cg", max_iterations=2))
    assert info.value.best.shape == v.shape
    assert info.value.relative_residual > 1e-9
    assert info.value.iterations == 2


def test_cg_from_zero_start():
    op = assemble(Smoother2DSpec(7, 7, 10))
    v = np.random.default_rng(6).normal(size=49)
    x, iters, res = conjugate_gradient(op, v, np.zeros(49), 1e-12, 500)
    assert res <= 1e-12 and iters <= 500
    np.testing.assert_allclose(x, np.linalg.solve(op.matrix.toarray(), v), atol=1e-9)


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        SolveConfig(tolerance=0.01)
    with pytest.raises(ValueError):
        SolveConfig(method="gauss_seidel")
    with pytest.raises(ValueError):
        solve(assemble(Smoother1DSpec(9, 1)), np.zeros(8))


def test_impulse_response_shapes():
    d = impulse_response(Smoother1DSpec(45, 0))
    assert d[22] == 1 and d.sum() == 1
    u = impulse_response(Smoother1DSpec(45, 36), center=22)
    np.testing.assert_allclose(u, u[::-1], atol=1e-12)
    assert np.argmax(u) == 22
    with pytest.raises(ValueError):
        impulse_response(Smoother1DSpec(45, 36), center=45)


def test_2d_impulse_rings_decrease():
    spec = Smoother2DSpec(33, 33, 36)
    u = impulse_response(spec)
    _, rings = _geometry(spec.shape, (16, 16))
    means = [u[rings == k].mean() for k in range(6)]
    assert all(a > b for a, b in zip(means, means[1:]))


def test_energy_examples():
    v = np.full(10, 3.0)
    assert discrete_energy(v, v, 5.0) == pytest.approx(0.0, abs=1e-20)
    w = np.zeros(8)
    w[1] = 1.0
    p = np.pad(w, 1, mode="symmetric")
    d2 = p[2:] - 2 * p[1:-1] + p[:-2]
    assert discrete_energy(w, w, 1.0) == pytest.approx(np.sum(d2 ** 2))
    with pytest.raises(ValueError):
        discrete_energy(w, w[:-1], 1.0)


@pytest.mark.parametrize("spec", [Smoother1DSpec(25, 36), Smoother2DSpec(8, 8, 4),
                                  Smoother2DSpec(8, 8, 4, "axis_only", "periodic")])
def test_solution_minimizes_energy(spec):
    rng = np.random.default_rng(7)
    v = rng.uniform(0, 1, spec.shape)
    u, _ = solve(assemble(spec), v, SolveConfig(tolerance=1e-12))
    stencil = getattr(spec, "stencil", "diagonal_augmented")
    e0 = discrete_energy(u, v, spec.lam, stencil, spec.boundary)
    for _ in range(20):
        w = rng.normal(size=spec.shape)
        assert discrete_energy(u + 1e-3 * w, v, spec.lam, stencil, spec.boundary) > e0


@settings(max_examples=25, deadline=None)
@given(n=st.integers(5, 40), lam=st.floats(0.1, 200), a=st.floats(-3, 3), b=st.floats(-3, 3),
       boundary=st.sampled_from(["mirror", "periodic", "truncate"]), seed=st.integers(0, 2 ** 16))
def test_linearity_and_mass(n, lam, a, b, boundary, seed):
    rng = np.random.default_rng(seed)
    v, w = rng.normal(size=(2, n))
    op = assemble(Smoother1DSpec(n, lam, boundary))
    cfg = SolveConfig(tolerance=1e-12)
    uv, _ = solve(op, v, cfg)
    uw, _ = solve(op, w, cfg)
    uc, _ = solve(op, a * v + b * w, cfg)
    np.testing.assert_allclose(uc, a * uv + b * uw, atol=1e-8)
    # the penalty annihilates constants and is symmetric, so the sum is preserved
    assert uv.sum() == pytest.approx(v.sum(), abs=1e-8)


@settings(max_examples=15, deadline=None)
@given(rows=st.integers(5, 16), cols=st.integers(5, 16), lam=st.floats(0.5, 120),
       stencil=st.sampled_from(["axis_only", "diagonal_augmented"]), seed=st.integers(0, 2 ** 16))
def test_2d_filter_is_a_contraction_toward_mean(rows, cols, lam, stencil, seed):
    img = np.random.default_rng(seed).uniform(0, 255, (rows, cols))
    out = filter_image(img, lam, Smoother2DSpec(rows, cols, lam, stencil))
    assert out.var() <= img.var() + 1e-9
    assert out.mean() == pytest.approx(img.mean(), abs=1e-6)


def test_cg_and_direct_agree_within_ten_tolerances():
    op = assemble(Smoother2DSpec(24, 20, 80))
    v = np.random.default_rng(9).uniform(0, 1, (24, 20))
    a, _ = solve(op, v, SolveConfig(method="iterative_cg"))
    b, _ = solve(op, v, SolveConfig(method="direct_banded"))
    assert np.linalg.norm(a - b) / np.linalg.norm(b) < 10 * 1e-9


def test_2d_impulse_has_square_symmetry():
    u = impulse_response(Smoother2DSpec(21, 21, 36))
    for t in (np.rot90(u), u[::-1], u[:, ::-1], u.T):
        np.testing.assert_allclose(t, u, atol=1e-10)
