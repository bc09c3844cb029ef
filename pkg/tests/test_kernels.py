import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resistive_sift.kernels import (REFERENCE_LAMBDAS, Unfittable, deviation_report_1d,
                                    deviation_report_2d, fit_sigma, gaussian_kernel_1d,
                                    golden_section, lambda_sigma_curve, regularization_kernel)
from resistive_sift.network import Smoother1DSpec, Smoother2DSpec
from resistive_sift.solver import impulse_response


def test_gaussian_near_delta():
    assert gaussian_kernel_1d(0.3, 3)[3] > 0.99


def test_gaussian_neighbor_ratio():
    k = gaussian_kernel_1d(1.0, 4)
    assert k[5] / k[4] == pytest.approx(math.exp(-0.5))
    assert k.sum() == pytest.approx(1.0)


def test_gaussian_brute_force():
    k = gaussian_kernel_1d(2.0, 8)
    raw = [math.exp(-(x * x) / 8.0) for x in range(-8, 9)]
    np.testing.assert_allclose(k, np.array(raw) / sum(raw), rtol=1e-14)


def test_gaussian_errors():
    with pytest.raises(ValueError):
        gaussian_kernel_1d(2.0, 5)
    with pytest.raises(ValueError):
        gaussian_kernel_1d(0.0)


def test_printed_gaussian_ignores_sigma_in_exponent():
    a = gaussian_kernel_1d(1.0, 6, as_printed=True)
    b = gaussian_kernel_1d(2.0, 6, as_printed=True)
    np.testing.assert_allclose(a, b)


def test_regularization_kernel_shape():
    x = np.linspace(-60, 60, 2401)
    r = regularization_kernel(x, 36.0)
    np.testing.assert_allclose(r, r[::-1])
    assert np.argmax(r) == 1200
    assert abs(r[-1]) < 1e-6 * r.max()
    assert (r < 0).any()  # damped cosine lobes
    with pytest.raises(ValueError):
        regularization_kernel(x, 0.0)


def test_printed_regularization_kernel_diverges():
    assert abs(regularization_kernel(200.0, 36.0, as_printed=True)) > 1e6


@pytest.mark.parametrize("lam,bound", [(20, 0.03), (100, 0.015), (1000, 0.005)])
def test_chain_response_approaches_continuous_kernel(lam, bound):
    n = 801
    u = impulse_response(Smoother1DSpec(n, lam))
    r = regularization_kernel(np.arange(n) - n // 2, lam)
    assert np.abs(u - r).max() / r.max() < bound


def test_golden_section_quadratic():
    assert golden_section(lambda x: (x - 1.234) ** 2, 0, 5, 1e-6) == pytest.approx(1.234, abs=1e-5)


def test_self_fit_sigma_2():
    x = np.arange(45) - 22
    fit = fit_sigma(np.exp(-x ** 2 / 8.0))
    assert fit.sigma_star == pytest.approx(2.0, abs=1e-3)
    assert fit.max_relative_error < 0.1


@settings(max_examples=20, deadline=None)
@given(sigma=st.floats(0.8, 8.0), amp=st.floats(0.01, 100))
def test_self_fit_recovers_sigma(sigma, amp):
    x = np.arange(81) - 40
    fit = fit_sigma(amp * np.exp(-x ** 2 / (2 * sigma ** 2)))
    assert fit.sigma_star == pytest.approx(sigma, abs=2e-3)


def test_self_fit_2d():
    y, x = np.mgrid[-15:16, -15:16]
    fit = fit_sigma(np.exp(-(x ** 2 + y ** 2) / (2 * 2.5 ** 2)))
    assert fit.sigma_star == pytest.approx(2.5, abs=1e-3)
    assert fit.peak_index == (15, 15)


def test_flat_response_is_unfittable():
    with pytest.raises(Unfittable):
        fit_sigma(impulse_response(Smoother1DSpec(15, 1e6)))
    with pytest.raises(Unfittable):
        fit_sigma(np.ones(15))


def test_deviation_1d_identity():
    rep = deviation_report_1d(45, 0.0)
    assert rep.identity and not rep.errors.any()
    assert rep.summary()["identity_filter"]


def test_deviation_1d_fig_setup():
    rep = deviation_report_1d(45, 36)
    assert 0.8 <= rep.mean_error <= 3.0
    assert rep.max_error <= 5.0
    assert len(rep.rows()) == 45


def test_deviation_2d_identity():
    rep = deviation_report_2d(Smoother2DSpec(9, 9, 0.0))
    assert not rep.ring_errors.any()


def test_first_ring_error_peaks_only_with_nine_point_stencil():
    nine = deviation_report_2d(Smoother2DSpec(33, 33, 36.0))
    five = deviation_report_2d(Smoother2DSpec(33, 33, 36.0, "axis_only"))
    assert nine.summary()["max_error_ring"] == 1
    assert five.summary()["max_error_ring"] == 2


def test_sigma_grows_with_lambda():
    rows = lambda_sigma_curve(REFERENCE_LAMBDAS)
    sig = [r[1] for r in rows]
    assert all(a < b for a, b in zip(sig, sig[1:]))
    with pytest.raises(ValueError):
        lambda_sigma_curve([0.0])


def test_fit_is_scale_invariant():
    u = impulse_response(Smoother1DSpec(45, 36))
    a, b = fit_sigma(u), fit_sigma(250.0 * u)
    assert a.sigma_star == pytest.approx(b.sigma_star, rel=1e-12)
    np.testing.assert_allclose(a.errors, b.errors, atol=1e-10)


def test_continuous_kernel_is_finite_and_matches_network_center():
    x = np.arange(-200, 201)
    r = regularization_kernel(x, 36.0)
    assert np.isfinite(r.sum()) and r.sum() == pytest.approx(1.0, rel=1e-3)
    u = impulse_response(Smoother1DSpec(81, 36))
    center = slice(40 - 5, 40 + 6)
    np.testing.assert_allclose(u[center], r[195:206] / r.sum(), rtol=0.10)
