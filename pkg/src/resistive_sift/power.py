"""Steady-state power and pyramid energy of the resistor network."""

from dataclasses import dataclass, field

import numpy as np

from .kernels import REFERENCE_LAMBDAS
from .network import (LinearOperator, Smoother2DSpec, assemble, branch_conductances,
                      conductances_from_lambda)
from .solver import SolveConfig, solve

REFERENCE_PYRAMID_ENERGY = 669.6e-12  # joules, 256x256 input, 1 ns settle
DEFAULT_FULL_SCALE = 0.255  # volts for pixel value 255
DEFAULT_R1 = 250.0


@dataclass
class PowerReport:
    """Steady-state power of one network (watts).

    ``source_power`` is what the pixel sources deliver and is the consumption figure;
    ``active_power`` is delivered by the negative-resistance branches and kept as a
    separate line item.
    """

    branch_power: np.ndarray = field(repr=False)  # signed, one entry per branch
    source_resistor_power: np.ndarray = field(repr=False)  # g0 (v - u)^2 per node
    source_power: float = 0.0
    active_power: float = 0.0
    dissipated_power: float = 0.0  # positive resistors only
    pixels: int = 0

    @property
    def delivered_power(self) -> float:
        return self.source_power + self.active_power

    @property
    def per_pixel_power(self) -> float:
        return self.source_power / self.pixels

    @property
    def conservation_error(self) -> float:
        scale = max(abs(self.delivered_power), abs(self.dissipated_power))
        return 0.0 if scale == 0 else abs(self.delivered_power - self.dissipated_power) / scale

    def energy(self, settle_time: float) -> float:
        return self.source_power * settle_time


def steady_power(op: LinearOperator, v, u, g0: float, residual_tol: float = 1e-6) -> PowerReport:
    """Per-branch and total power of the network realizing ``op`` at steady state ``u``."""
    v = np.asarray(v, dtype=float).ravel()
    u = np.asarray(u, dtype=float).ravel()
    if v.size != op.dimension or u.size != op.dimension:
        raise ValueError("dimension mismatch between operator and voltages")
    res = np.linalg.norm(op.matrix @ u - v)
    if res > residual_tol * max(np.linalg.norm(v), 1e-300) and res > 1e-300:
        raise ValueError(f"u is not the steady state (residual {res:.3e})")
    branches = branch_conductances(op, g0)
    du = u[branches.row] - u[branches.col]
    branch_power = branches.data * du ** 2
    source_resistor = g0 * (v - u) ** 2
    source_power = float(np.sum(g0 * (v - u) * v))
    negative = branches.data < 0
    active = float(-np.sum(branch_power[negative]))
    dissipated = float(np.sum(source_resistor) + np.sum(branch_power[~negative]))
    return PowerReport(branch_power=branch_power, source_resistor_power=source_resistor,
                       source_power=source_power, active_power=active,
                       dissipated_power=dissipated, pixels=op.dimension)


@dataclass
class LevelPower:
    lam: float
    octave: int
    shape: tuple
    report: PowerReport


@dataclass
class PyramidEnergy:
    levels: list
    settle_time: float
    full_scale: float
    r1_ohms: float

    @property
    def total_power(self) -> float:
        return sum(lv.report.source_power for lv in self.levels)

    @property
    def energy(self) -> float:
        return sum(lv.report.energy(self.settle_time) for lv in self.levels)

    @property
    def active_energy(self) -> float:
        return sum(lv.report.active_power for lv in self.levels) * self.settle_time

    def pixels_per_lambda(self) -> dict:
        out = {}
        for lv in self.levels:
            out[lv.lam] = out.get(lv.lam, 0) + int(np.prod(lv.shape))
        return out

    @property
    def reference_ratio(self) -> float:
        return self.energy / REFERENCE_PYRAMID_ENERGY

    def rows(self):
        return [(lv.lam, lv.octave, lv.shape[0], lv.shape[1], lv.report.source_power,
                 lv.report.per_pixel_power, lv.report.active_power,
                 lv.report.energy(self.settle_time)) for lv in self.levels]


def decimate(image, octave: int) -> np.ndarray:
    step = 2 ** octave
    return np.asarray(image)[::step, ::step]


def pyramid_energy(image, settle_time: float = 1e-9, lams=REFERENCE_LAMBDAS, octaves: int = 3,
                   full_scale: float = DEFAULT_FULL_SCALE, r1_ohms: float = DEFAULT_R1,
                   stencil: str = "diagonal_augmented", boundary: str = "mirror",
                   config: SolveConfig | None = None) -> PyramidEnergy:
    """Steady power of every (lam, octave) network, times the settle time.

    Pixel values 0..255 map linearly to 0..``full_scale`` volts.
    """
    if not settle_time > 0:
        raise ValueError("settle_time must be positive")
    image = np.asarray(image, dtype=float)
    volts = image / 255.0 * full_scale
    levels = []
    for lam in lams:
        g0 = conductances_from_lambda(lam, r1_ohms).g0
        for o in range(octaves):
            v = decimate(volts, o)
            op = assemble(Smoother2DSpec(*v.shape, lam, stencil, boundary))
            if np.any(v):
                u, _ = solve(op, v, config or SolveConfig(tolerance=1e-11))
            else:
                u = np.zeros_like(v)
            levels.append(LevelPower(float(lam), o, v.shape, steady_power(op, v, u, g0)))
    return PyramidEnergy(levels, settle_time, full_scale, r1_ohms)
