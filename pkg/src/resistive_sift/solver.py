"""Steady-state node voltages of the network: solve (I + lam B) u = v."""

import functools
import time
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .network import (LinearOperator, Smoother1DSpec, Smoother2DSpec, assemble, penalty_1d,
                      penalty_2d)

Method = Literal["direct_banded", "iterative_cg"]


@dataclass(frozen=True)
class SolveConfig:
    method: Method | None = None  # None: banded for 1-D, CG for 2-D
    tolerance: float = 1e-9
    max_iterations: int | None = None  # None: max(dimension, 10000)
    preconditioner: Literal["none", "jacobi"] = "none"

    def __post_init__(self):
        if not 0 < self.tolerance <= 1e-3:
            raise ValueError(f"tolerance must lie in (0, 1e-3], got {self.tolerance}")
        if self.method not in (None, "direct_banded", "iterative_cg"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class SolveReport:
    method: str
    iterations: int
    relative_residual: float
    seconds: float


class SolveFailure(RuntimeError):
    """CG did not reach the tolerance; carries the best iterate."""

    def __init__(self, message, best, relative_residual, iterations):
        super().__init__(message)
        self.best = best
        self.relative_residual = relative_residual
        self.iterations = iterations


def _relres(op: LinearOperator, u: np.ndarray, v: np.ndarray) -> float:
    nv = np.linalg.norm(v)
    r = np.linalg.norm(op.matrix @ u - v)
    return 0.0 if nv == 0 and r == 0 else r / (nv if nv > 0 else 1.0)


def _banded(op: LinearOperator) -> np.ndarray | None:
    """Upper banded storage for solveh_banded, or None if the matrix has wrap-around taps."""
    m = op.matrix.tocoo()
    width = int(np.max(np.abs(m.row - m.col))) if m.nnz else 0
    if width > 2:
        return None
    n = op.dimension
    ab = np.zeros((width + 1, n))
    for k in range(width + 1):
        ab[width - k, k:] = op.matrix.diagonal(k)
    return ab


def _direct(op: LinearOperator, v: np.ndarray) -> np.ndarray:
    ab = _banded(op)
    if ab is not None:
        return scipy.linalg.solveh_banded(ab, v)
    return spla.splu(op.matrix.tocsc()).solve(v)


def conjugate_gradient(op: LinearOperator, v: np.ndarray, x0: np.ndarray, tol: float,
                       max_iterations: int, jacobi: bool = False):
    A = op.matrix
    nv = np.linalg.norm(v)
    if nv == 0:
        return np.zeros_like(v), 0, 0.0
    inv_diag = 1.0 / A.diagonal() if jacobi else None
    x = x0.copy()
    r = v - A @ x
    z = r * inv_diag if jacobi else r
    p = z.copy()
    rz = r @ z
    best, best_res = x.copy(), np.linalg.norm(r) / nv
    for it in range(1, max_iterations + 1):
        if best_res <= tol:
            # the recursive residual drifts; confirm with the true one and restart if needed
            true_r = v - A @ best
            best_res = np.linalg.norm(true_r) / nv
            if best_res <= tol:
                return best, it - 1, best_res
            x, r = best.copy(), true_r
            z = r * inv_diag if jacobi else r
            p = z.copy()
            rz = r @ z
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        res = np.linalg.norm(r) / nv
        if res < best_res:
            best, best_res = x.copy(), res
        z = r * inv_diag if jacobi else r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    best_res = np.linalg.norm(v - A @ best) / nv
    if best_res <= tol:
        return best, max_iterations, best_res
    raise SolveFailure(f"CG did not converge in {max_iterations} iterations "
                       f"(relative residual {best_res:.3e})", best, best_res, max_iterations)


def solve(op: LinearOperator, v, config: SolveConfig | None = None):
    """Return ``(u, report)`` with ``||(I + lam B) u - v|| / ||v|| <= tolerance``.

    The input keeps its shape; 2-D grids may be passed as (rows, cols) arrays.
    """
    config = config or SolveConfig()
    v = np.asarray(v, dtype=float)
    if v.size != op.dimension:
        raise ValueError(f"operator has {op.dimension} nodes, input has {v.size}")
    flat = v.ravel()
    method = config.method or ("direct_banded" if len(op.shape) == 1 else "iterative_cg")
    t0 = time.perf_counter()
    if op.lam == 0:
        u, iters = flat.copy(), 0
    elif method == "direct_banded":
        u, iters = _direct(op, flat), 0
    else:
        max_it = config.max_iterations or max(op.dimension, 10000)
        # starting from v: a smooth input is already close to its own filtered version
        u, iters, _ = conjugate_gradient(op, flat, flat.copy(), config.tolerance, max_it,
                                         jacobi=config.preconditioner == "jacobi")
    relres = _relres(op, u, flat)
    report = SolveReport(method=method, iterations=iters, relative_residual=relres,
                         seconds=time.perf_counter() - t0)
    if relres > config.tolerance:
        raise SolveFailure(f"{method} residual {relres:.3e} above tolerance", u.reshape(v.shape),
                           relres, iters)
    return u.reshape(v.shape), report


def impulse_response(spec: Smoother1DSpec | Smoother2DSpec, center=None,
                     config: SolveConfig | None = None) -> np.ndarray:
    """Steady state for a unit source at ``center`` (default: the middle node)."""
    shape = spec.shape
    if center is None:
        center = tuple(s // 2 for s in shape)
    center = np.atleast_1d(center)
    if len(center) != len(shape) or any(not 0 <= c < s for c, s in zip(center, shape)):
        raise ValueError(f"center {tuple(center)} outside grid {shape}")
    v = np.zeros(shape)
    v[tuple(center)] = 1.0
    u, _ = solve(assemble(spec), v, config)
    return u


def filter_image(image, lam: float, spec2d: Smoother2DSpec | None = None,
                 config: SolveConfig | None = None) -> np.ndarray:
    """Network steady state with the image as source voltages."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError("image must be 2-D")
    if not np.all(np.isfinite(image)):
        raise ValueError("image has non-finite pixels")
    if spec2d is None:
        spec2d = Smoother2DSpec(*image.shape, lam)
    elif spec2d.shape != image.shape:
        raise ValueError(f"spec is {spec2d.shape}, image is {image.shape}")
    elif spec2d.lam != lam:
        spec2d = Smoother2DSpec(spec2d.rows, spec2d.cols, lam, spec2d.stencil, spec2d.boundary)
    if lam == 0:
        return image.copy()
    u, _ = solve(assemble(spec2d), image, config)
    return u


@functools.lru_cache(maxsize=64)
def _cached_penalty(shape, stencil, boundary):
    if len(shape) == 1:
        return penalty_1d(shape[0], boundary)
    return penalty_2d(*shape, stencil, boundary)


def discrete_energy(u, v, lam: float, stencil: str = "diagonal_augmented",
                    boundary: str = "mirror") -> float:
    """Data misfit plus ``lam * u^T B u``, the quantity the steady state minimizes.

    For mirror and periodic edges the penalty equals the sum of squared second
    differences (1-D) or squared Laplacian values (2-D) of ``u``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    B = _cached_penalty(u.shape, stencil, boundary)
    flat = u.ravel()
    return float(np.sum((u - v) ** 2) + lam * (flat @ (B @ flat)))
