"""Compare network impulse responses with Gaussians and the regularization kernel."""

import math
from dataclasses import dataclass, field

import numpy as np

from .network import Smoother1DSpec, Smoother2DSpec
from .solver import SolveConfig, impulse_response

REFERENCE_LAMBDAS = (4.0, 20.0, 40.0, 80.0, 100.0, 120.0)
SUPPORT_FLOOR = 1e-3  # fit domain: fitted Gaussian above this fraction of peak
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Unfittable(ValueError):
    """Response has no unique peak, or the best sigma sits on the search bracket edge."""


def gaussian_kernel_1d(sigma: float, support_radius: int | None = None,
                       as_printed: bool = False) -> np.ndarray:
    """Sampled Gaussian on offsets ``-radius..radius``, normalized to unit sum.

    ``as_printed`` drops the 2 sigma^2 divisor from the exponent, as printed in the
    source formula; it exists for documentation and is never used in experiments.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if support_radius is None:
        support_radius = max(1, math.ceil(4 * sigma))
    if support_radius < math.ceil(3 * sigma):
        raise ValueError(f"support_radius {support_radius} < ceil(3 sigma) = {math.ceil(3 * sigma)}")
    x = np.arange(-support_radius, support_radius + 1, dtype=float)
    if as_printed:
        k = np.exp(-x ** 2) / (2 * np.pi * sigma ** 2)
    else:
        k = np.exp(-x ** 2 / (2 * sigma ** 2))
    return k / k.sum()


def regularization_kernel(x, lam: float, as_printed: bool = False):
    """Impulse response of the continuous second-derivative regularizer.

    ``R(x) = exp(-|x|/b) cos(|x|/b - pi/4) / (2 lam^(1/4))`` with ``b = sqrt(2) lam^(1/4)``.
    The printed form has a positive exponent (``as_printed=True``) and diverges.
    """
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    a = lam ** 0.25
    t = np.abs(np.asarray(x, dtype=float)) / (math.sqrt(2.0) * a)
    decay = np.exp(t) if as_printed else np.exp(-t)
    return decay * np.cos(t - math.pi / 4) / (2 * a)


@dataclass
class FitResult:
    sigma_star: float
    mean_relative_error: float  # percent of peak, over the fit domain
    max_relative_error: float
    errors: np.ndarray = field(repr=False)  # percent of peak, every node
    fitted: np.ndarray = field(repr=False)
    support: np.ndarray = field(repr=False)
    peak_index: tuple = ()


def _geometry(shape, peak):
    grids = np.meshgrid(*[np.arange(s) - p for s, p in zip(shape, peak)], indexing="ij")
    r2 = sum(g.astype(float) ** 2 for g in grids)
    rings = np.max(np.abs(np.stack(grids)), axis=0)
    return r2, rings


def _peak(response: np.ndarray) -> tuple:
    flat = np.argmax(response)
    peak = response.flat[flat]
    if not peak > 0 or np.count_nonzero(response == peak) != 1:
        raise Unfittable("response has no unique positive peak")
    return np.unravel_index(flat, response.shape)


def _errors(response, peak_value, r2, sigma):
    fitted = peak_value * np.exp(-r2 / (2 * sigma ** 2))
    errors = np.abs(response - fitted) / peak_value * 100.0
    return fitted, errors, fitted >= SUPPORT_FLOOR * peak_value


def _objective(response, peak_value, r2, rings, sigma, domain):
    # equal weight per ring (Chebyshev distance) so 1-D and 2-D fits weigh distances alike
    fitted = peak_value * np.exp(-r2[domain] / (2 * sigma ** 2))
    errors = np.abs(response[domain] - fitted)
    idx = rings[domain]
    sums = np.bincount(idx, weights=errors)
    counts = np.bincount(idx)
    used = counts > 0
    return float(np.mean(sums[used] / counts[used])) / peak_value * 100.0


def golden_section(f, lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _moment_sigma(response, r2):
    w = np.clip(response, 0.0, None)
    return float(np.sqrt(np.sum(w * r2) / np.sum(w) / response.ndim))


def fit_sigma(response, bracket: tuple[float, float] | None = None, tol: float = 1e-3,
              scan_points: int = 200, max_rounds: int = 20) -> FitResult:
    """Best peak-matched Gaussian width for an impulse response.

    The Gaussian has the response's peak value and is centered on it. Errors are
    ``|response - gaussian| / peak`` in percent. Sigma minimizes the mean over rings
    (nodes at equal Chebyshev distance from the peak) of the ring-mean error on the
    fit domain, the nodes where the fitted Gaussian is at least 1e-3 of peak. The
    domain depends on sigma, so the fit alternates between minimizing on a fixed
    domain (coarse scan, then golden-section search) and recomputing the domain until
    it stops changing.
    """
    response = np.asarray(response, dtype=float)
    peak = _peak(response)
    peak_value = response[peak]
    r2, rings = _geometry(response.shape, peak)
    lo, hi = bracket or (0.1, min(response.shape) / 4.0)
    grid = np.linspace(lo, hi, scan_points)

    sigma = min(max(_moment_sigma(response, r2), lo), hi)
    domain = _errors(response, peak_value, r2, sigma)[2]
    seen = []
    for _ in range(max_rounds):
        f = lambda s: _objective(response, peak_value, r2, rings, s, domain)  # noqa: E731
        vals = np.array([f(s) for s in grid])
        k = int(np.argmin(vals))
        if k == len(grid) - 1:
            raise Unfittable(f"best sigma at bracket edge {hi:.3g}: response too flat for the grid")
        sigma = golden_section(f, grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)], tol)
        new_domain = _errors(response, peak_value, r2, sigma)[2]
        seen.append((f(sigma), sigma))
        if np.array_equal(new_domain, domain):
            break
        domain = new_domain
    else:
        # domain cycles between a few shapes: keep the best width seen
        sigma = min(seen)[1]
    if not lo < sigma < hi:
        raise Unfittable(f"sigma {sigma:.4g} clamped to bracket [{lo}, {hi}]")
    fitted, errors, support = _errors(response, peak_value, r2, sigma)
    return FitResult(sigma_star=sigma, mean_relative_error=float(errors[support].mean()),
                     max_relative_error=float(errors[support].max()), errors=errors,
                     fitted=fitted, support=support, peak_index=tuple(int(p) for p in peak))


@dataclass
class DeviationReport1D:
    lam: float
    node_count: int
    response: np.ndarray = field(repr=False)
    fitted: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)
    support: np.ndarray = field(repr=False)
    sigma_star: float = 0.0
    mean_error: float = 0.0
    max_error: float = 0.0
    identity: bool = False

    def rows(self):
        """(node, response, fitted, error %, in_support) per node."""
        return [(i, self.response[i], self.fitted[i], self.errors[i], int(self.support[i]))
                for i in range(self.node_count)]

    def summary(self) -> dict:
        return {"lambda": self.lam, "node_count": self.node_count, "sigma_star": self.sigma_star,
                "mean_error_percent": self.mean_error, "max_error_percent": self.max_error,
                "identity_filter": self.identity}


def deviation_report_1d(node_count: int = 45, lam: float = 36.0, boundary: str = "mirror",
                        config: SolveConfig | None = None) -> DeviationReport1D:
    spec = Smoother1DSpec(node_count, lam, boundary)
    response = impulse_response(spec, config=config)
    if lam == 0:
        # identity filter: the response is the delta itself
        zeros = np.zeros(node_count)
        support = response > 0
        return DeviationReport1D(lam, node_count, response, response.copy(), zeros, support,
                                 identity=True)
    fit = fit_sigma(response)
    return DeviationReport1D(lam, node_count, response, fit.fitted, fit.errors, fit.support,
                             sigma_star=fit.sigma_star, mean_error=fit.mean_relative_error,
                             max_error=fit.max_relative_error)


@dataclass
class RingReport:
    spec: Smoother2DSpec
    sigma_star: float
    ring_errors: np.ndarray  # index = Chebyshev distance from the driven node
    response: np.ndarray = field(repr=False)
    fitted: np.ndarray = field(repr=False)

    def rows(self):
        return [(k, float(e)) for k, e in enumerate(self.ring_errors) if k >= 1]

    def summary(self) -> dict:
        e = self.ring_errors
        return {"lambda": self.spec.lam, "rows": self.spec.rows, "cols": self.spec.cols,
                "stencil": self.spec.stencil, "boundary": self.spec.boundary,
                "sigma_star": self.sigma_star, "first_ring_error_percent": float(e[1]),
                "max_outer_ring_error_percent": float(e[2:].max()),
                "max_error_ring": int(np.argmax(e[1:]) + 1)}


def deviation_report_2d(spec: Smoother2DSpec, config: SolveConfig | None = None) -> RingReport:
    """Per-ring mean |response - fitted Gaussian| / peak, in percent.

    Rings are Chebyshev-distance shells around the driven center node; ring 0 is the
    driven node itself.
    """
    response = impulse_response(spec, config=config)
    center = tuple(s // 2 for s in spec.shape)
    n_rings = min(min(c, s - 1 - c) for c, s in zip(center, spec.shape)) + 1
    if spec.lam == 0:
        return RingReport(spec, 0.0, np.zeros(n_rings), response, response.copy())
    fit = fit_sigma(response)
    _, rings = _geometry(spec.shape, center)
    errors = np.array([fit.errors[rings == k].mean() for k in range(n_rings)])
    return RingReport(spec, fit.sigma_star, errors, response, fit.fitted)


def lambda_sigma_curve(lams=REFERENCE_LAMBDAS, config: SolveConfig | None = None):
    """Rows of (lam, sigma_star, lam / sigma_star**4) from 1-D impulse fits.

    Each chain has at least 40 * lam**(1/4) nodes so the edges do not shape the fit.
    """
    rows = []
    for lam in lams:
        if not lam > 0:
            raise ValueError(f"lambda must be positive, got {lam}")
        n = max(45, math.ceil(40 * lam ** 0.25)) | 1
        fit = fit_sigma(impulse_response(Smoother1DSpec(n, lam), config=config))
        rows.append((float(lam), fit.sigma_star, lam / fit.sigma_star ** 4))
    return rows
