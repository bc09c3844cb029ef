"""Discrete operators and conductances of the 1-D and 2-D active resistor networks.

The steady state of the network solves ``(I + lam * B) u = v`` where ``v`` holds the
source voltages and ``B`` is the squared second-difference (bi-Laplacian) penalty.
Operators are stored as scipy CSR matrices together with the grid metadata.
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.sparse as sp

Boundary = Literal["mirror", "periodic", "truncate"]
Stencil = Literal["axis_only", "diagonal_augmented"]

BOUNDARIES = ("mirror", "periodic", "truncate")
STENCILS = ("axis_only", "diagonal_augmented")

# 9-point Laplacian: diagonal 1/6, axis 4/6, center -20/6
LAPLACIAN_9 = np.array([[1.0, 4.0, 1.0], [4.0, -20.0, 4.0], [1.0, 4.0, 1.0]]) / 6.0
LAPLACIAN_5 = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])


class IdentityFilter(ValueError):
    """Raised when lam == 0: the network degenerates to identity filtering (g0 infinite)."""


@dataclass(frozen=True)
class Smoother1DSpec:
    node_count: int
    lam: float
    boundary: Boundary = "mirror"

    def __post_init__(self):
        if self.node_count < 5:
            raise ValueError(f"node_count must be >= 5 for the 5-tap stencil, got {self.node_count}")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lam must be finite and >= 0, got {self.lam}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"unknown boundary {self.boundary!r}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.node_count,)


@dataclass(frozen=True)
class Smoother2DSpec:
    rows: int
    cols: int
    lam: float
    stencil: Stencil = "diagonal_augmented"
    boundary: Boundary = "mirror"

    def __post_init__(self):
        if self.rows < 5 or self.cols < 5:
            raise ValueError(f"grid must be at least 5x5, got {self.rows}x{self.cols}")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lam must be finite and >= 0, got {self.lam}")
        if self.stencil not in STENCILS:
            raise ValueError(f"unknown stencil {self.stencil!r}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"unknown boundary {self.boundary!r}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.rows, self.cols)


@dataclass(frozen=True)
class ConductanceSet:
    """Branch conductances in siemens; ``g2`` is the negative (active) branch."""

    g0: float
    g1: float
    g2: float
    r1_ohms: float

    @property
    def r0_ohms(self) -> float:
        return 1.0 / self.g0

    @property
    def r2_ohms(self) -> float:
        return 1.0 / self.g2

    @property
    def lam(self) -> float:
        return self.g1 / self.g0


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Immutable ``I + lam * B`` on a 1-D or 2-D grid (row-major node order)."""

    matrix: sp.csr_matrix
    penalty: sp.csr_matrix
    lam: float
    shape: tuple[int, ...]
    boundary: Boundary
    stencil: str

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, u):
        u = np.asarray(u, dtype=float)
        return (self.matrix @ u.ravel()).reshape(u.shape)


def conductances_from_lambda(lam: float, r1_ohms: float) -> ConductanceSet:
    """Conductance set with g1/g0 = lam and g1/g2 = -4 for reference resistor r1.

    Raises
    ------
    IdentityFilter
        If ``lam == 0``; callers should filter with the identity instead.
    ValueError
        For negative or non-finite inputs.
    """
    if not r1_ohms > 0 or not np.isfinite(r1_ohms):
        raise ValueError(f"r1_ohms must be positive, got {r1_ohms}")
    if lam < 0 or not np.isfinite(lam):
        raise ValueError(f"lam must be >= 0, got {lam}")
    if lam == 0:
        raise IdentityFilter("lam == 0 gives an infinite source conductance; use identity filtering")
    g1 = 1.0 / r1_ohms
    return ConductanceSet(g0=g1 / lam, g1=g1, g2=-g1 / 4.0, r1_ohms=float(r1_ohms))


def laplacian_1d(n: int, boundary: Boundary) -> sp.csr_matrix:
    # mirror = half-sample reflection, which keeps the matrix symmetric
    lap = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n), format="lil")
    if boundary == "periodic":
        lap[0, n - 1] = 1.0
        lap[n - 1, 0] = 1.0
    else:
        lap[0, 0] = -1.0
        lap[n - 1, n - 1] = -1.0
    return lap.tocsr()


def _stencil_penalty(kernel: np.ndarray, shape: tuple[int, ...]) -> sp.csr_matrix:
    """Graph Laplacian whose branches are the off-center taps of ``kernel``.

    Out-of-range taps are dropped and the center absorbs the difference, so every
    row sums to zero.
    """
    kernel = np.atleast_2d(kernel)
    grid = (1,) * (2 - len(shape)) + tuple(shape)
    rows, cols = grid
    kr, kc = kernel.shape[0] // 2, kernel.shape[1] // 2
    rr, cc = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    i_all, j_all, w_all = [], [], []
    for dr in range(-kr, kr + 1):
        for dc in range(-kc, kc + 1):
            tap = kernel[dr + kr, dc + kc]
            if (dr == 0 and dc == 0) or tap == 0:
                continue
            r2, c2 = rr + dr, cc + dc
            inside = (r2 >= 0) & (r2 < rows) & (c2 >= 0) & (c2 < cols)
            i_all.append((rr * cols + cc)[inside])
            j_all.append((r2 * cols + c2)[inside])
            w_all.append(np.full(inside.sum(), tap))
    i = np.concatenate(i_all)
    j = np.concatenate(j_all)
    w = np.concatenate(w_all)
    n_nodes = rows * cols
    off = sp.coo_matrix((w, (i, j)), shape=(n_nodes, n_nodes)).tocsr()
    center = -np.asarray(off.sum(axis=1)).ravel()
    return (off + sp.diags(center)).tocsr()


def _squared_stencil(lap: np.ndarray) -> np.ndarray:
    from scipy.signal import convolve

    return convolve(lap, lap)


def penalty_1d(n: int, boundary: Boundary = "mirror") -> sp.csr_matrix:
    """Squared second-difference penalty B for an ``n``-node chain."""
    if boundary == "truncate":
        return _stencil_penalty(np.array([[1.0, -4.0, 6.0, -4.0, 1.0]]), (n,))
    lap = laplacian_1d(n, boundary)
    return (lap @ lap).tocsr()


def laplacian_2d(rows: int, cols: int, stencil: Stencil, boundary: Boundary) -> sp.csr_matrix:
    """5- or 9-point Laplacian on a row-major grid (mirror or periodic edges)."""
    kx = laplacian_1d(cols, boundary)
    ky = laplacian_1d(rows, boundary)
    lap = sp.kron(sp.identity(rows), kx) + sp.kron(ky, sp.identity(cols))
    if stencil == "diagonal_augmented":
        # Kx + Ky + Kx Ky / 6 reproduces the 1/6, 4/6, -20/6 taps
        lap = lap + sp.kron(ky, kx) / 6.0
    return lap.tocsr()


def penalty_2d(rows: int, cols: int, stencil: Stencil = "diagonal_augmented",
               boundary: Boundary = "mirror") -> sp.csr_matrix:
    if boundary == "truncate":
        kernel = LAPLACIAN_9 if stencil == "diagonal_augmented" else LAPLACIAN_5
        return _stencil_penalty(_squared_stencil(kernel), (rows, cols))
    lap = laplacian_2d(rows, cols, stencil, boundary)
    return (lap.T @ lap).tocsr()


def _build(penalty: sp.csr_matrix, lam: float, shape, boundary, stencil) -> LinearOperator:
    penalty = penalty.tocsr()
    penalty.eliminate_zeros()
    matrix = (sp.identity(penalty.shape[0], format="csr") + lam * penalty).tocsr()
    matrix.eliminate_zeros()
    return LinearOperator(matrix=matrix, penalty=penalty, lam=float(lam), shape=tuple(shape),
                          boundary=boundary, stencil=stencil)


def assemble_1d(spec: Smoother1DSpec) -> LinearOperator:
    return _build(penalty_1d(spec.node_count, spec.boundary), spec.lam, spec.shape,
                  spec.boundary, "five_tap")


def assemble_2d(spec: Smoother2DSpec) -> LinearOperator:
    return _build(penalty_2d(spec.rows, spec.cols, spec.stencil, spec.boundary), spec.lam,
                  spec.shape, spec.boundary, spec.stencil)


def assemble(spec: Smoother1DSpec | Smoother2DSpec) -> LinearOperator:
    if isinstance(spec, Smoother1DSpec):
        return assemble_1d(spec)
    return assemble_2d(spec)


def kcl_row(conductances: ConductanceSet) -> np.ndarray:
    """Node equation of the 1-D circuit divided by g0, taps at offsets -2..2.

    With g1/g0 = lam and g1/g2 = -4 this is the five-tap row for a penalty of lam/4,
    not lam; see ``realizing_conductances`` for the set whose row equals ``I + lam*B``.
    """
    g0, g1, g2 = conductances.g0, conductances.g1, conductances.g2
    return np.array([-g2, -g1, g0 + 2 * g1 + 2 * g2, -g1, -g2]) / g0


def realizing_conductances(lam: float, r1_ohms: float) -> ConductanceSet:
    """Branch values whose 1-D node equation is exactly the ``I + lam*B`` row.

    Keeps g1 = 1/r1 and g1/g2 = -4 but sets g1/g0 = 4*lam.
    """
    cs = conductances_from_lambda(lam, r1_ohms)
    return ConductanceSet(g0=cs.g1 / (4.0 * lam), g1=cs.g1, g2=cs.g2, r1_ohms=cs.r1_ohms)


def branch_conductances(op: LinearOperator, g0: float) -> sp.coo_matrix:
    """Upper-triangular branch conductances (siemens) of the network realizing ``op``.

    A network with source conductance ``g0`` per node and a branch G_ij between i and j
    has node equation ``g0 (u - v) + sum_j G_ij (u_i - u_j) = 0``, so
    ``G_ij = -g0 * lam * B_ij`` for i != j.
    """
    upper = sp.triu(op.penalty, k=1).tocoo()
    g = -g0 * op.lam * upper.data
    keep = g != 0
    return sp.coo_matrix((g[keep], (upper.row[keep], upper.col[keep])), shape=op.penalty.shape)


def node_residual(op: LinearOperator, u, v, conductances: ConductanceSet) -> np.ndarray:
    """Net current (amperes) into each node: ``g0 * (v - (I + lam B) u)``.

    Zero exactly at the steady state.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.size != op.dimension or v.size != op.dimension:
        raise ValueError(f"expected {op.dimension} nodes, got u={u.size}, v={v.size}")
    res = conductances.g0 * (v.ravel() - op.matrix @ u.ravel())
    return res.reshape(u.shape)
