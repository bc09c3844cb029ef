"""Settling of the network when every node carries a lumped stray capacitance.

Node dynamics: ``C du/dt = g0 * (v - (I + lam B) u)``, the net current of the network
realizing the operator (source conductance g0, branch conductances ``-g0 lam B_ij``).
"""

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .network import ConductanceSet, LinearOperator, assemble
from .solver import SolveConfig, solve

PICO = 1e-12
NANO = 1e-9
REFERENCE_CAPACITANCE = 1 * PICO
# stray capacitance (F) -> reported setting time (s)
REFERENCE_SETTLE_TIMES = {0.1 * PICO: 0.479 * NANO, 1 * PICO: 4.77 * NANO,
                      10 * PICO: 36.18 * NANO, 100 * PICO: 521.37 * NANO}


class IntegratorUnstable(RuntimeError):
    pass


@dataclass(frozen=True)
class TransientConfig:
    stray_capacitance: float
    settle_fraction: float = 0.01
    max_time: float | None = None  # None: 10**6 steps
    integrator: Literal["implicit_trapezoidal", "exponential_scaling"] = "implicit_trapezoidal"
    step_fraction: float = 0.1  # step = step_fraction * tau_min
    initial_voltage: float = 0.0
    snapshot_every: int = 0  # keep every k-th state; 0 keeps none
    duration: float | None = None  # integrate exactly this long instead of stopping at settle

    def __post_init__(self):
        if not self.stray_capacitance > 0:
            raise ValueError(f"stray_capacitance must be positive, got {self.stray_capacitance}")
        if not 0 < self.settle_fraction <= 0.1:
            raise ValueError(f"settle_fraction must lie in (0, 0.1], got {self.settle_fraction}")
        if self.integrator not in ("implicit_trapezoidal", "exponential_scaling"):
            raise ValueError(f"unknown integrator {self.integrator!r}")


@dataclass
class TransientTrace:
    times: np.ndarray = field(repr=False)
    distance: np.ndarray = field(repr=False)  # max-norm distance to steady state
    settle_time: float | None  # None: did not settle
    threshold: float
    time_step: float
    steady_state: np.ndarray = field(repr=False)
    final_state: np.ndarray = field(repr=False)
    snapshots: list = field(default_factory=list, repr=False)  # (time, state) pairs

    @property
    def settled(self) -> bool:
        return self.settle_time is not None

    def rows(self):
        return list(zip(self.times.tolist(), self.distance.tolist()))


def tau_min(conductances: ConductanceSet, capacitance: float) -> float:
    g = conductances
    return capacitance / (g.g0 + 2 * g.g1 + 2 * abs(g.g2))


def check_stability(op: LinearOperator) -> float:
    """Smallest eigenvalue of the operator; the dynamics are stable iff it is positive."""
    if op.dimension <= 2500:
        lo = float(np.linalg.eigvalsh(op.matrix.toarray())[0])
    else:
        lo = float(spla.eigsh(op.matrix, k=1, which="SA", tol=1e-6,
                              return_eigenvectors=False)[0])
    if not lo > 0:
        raise IntegratorUnstable(f"operator not positive definite (min eigenvalue {lo:.3e})")
    return lo


def _crossing(times, dist, thr) -> float | None:
    above = np.nonzero(dist > thr)[0]
    if above.size == 0:
        return float(times[0])
    k = above[-1]
    if k == len(dist) - 1:
        return None
    # linear interpolation inside the step that crosses the threshold for the last time
    frac = (dist[k] - thr) / (dist[k] - dist[k + 1])
    return float(times[k] + frac * (times[k + 1] - times[k]))


def simulate(spec, v, conductances: ConductanceSet, config: TransientConfig) -> TransientTrace:
    """Integrate the charging transient from ``initial_voltage`` on every node.

    ``spec`` is a smoother spec or an assembled operator. Implicit trapezoidal steps of
    ``step_fraction * tau_min`` are used; the step count to settle does not depend on C,
    so settle time scales exactly linearly with the capacitance.
    """
    if config.integrator == "exponential_scaling":
        ref = TransientConfig(REFERENCE_CAPACITANCE, config.settle_fraction,
                              None if config.max_time is None
                              else config.max_time * REFERENCE_CAPACITANCE / config.stray_capacitance,
                              "implicit_trapezoidal", config.step_fraction, config.initial_voltage,
                              config.snapshot_every,
                              None if config.duration is None
                              else config.duration * REFERENCE_CAPACITANCE / config.stray_capacitance)
        trace = simulate(spec, v, conductances, ref)
        scale = config.stray_capacitance / REFERENCE_CAPACITANCE
        trace.times = trace.times * scale
        trace.time_step *= scale
        if trace.settle_time is not None:
            trace.settle_time *= scale
        trace.snapshots = [(t * scale, s) for t, s in trace.snapshots]
        return trace

    op = spec if isinstance(spec, LinearOperator) else assemble(spec)
    if not op.lam > 0:
        raise ValueError("transient simulation needs lam > 0")
    v = np.asarray(v, dtype=float)
    if v.size != op.dimension:
        raise ValueError(f"operator has {op.dimension} nodes, input has {v.size}")
    check_stability(op)

    shape = v.shape
    vf = v.ravel()
    u_inf, _ = solve(op, vf, SolveConfig(tolerance=1e-13, method="direct_banded"))
    thr = config.settle_fraction * np.max(np.abs(u_inf))

    C = config.stray_capacitance
    dt = config.step_fraction * tau_min(conductances, C)
    # dimensionless step: h = g0 dt / C, independent of C
    h = conductances.g0 * dt / C
    n = op.dimension
    eye = sp.identity(n, format="csc")
    lhs = spla.splu((eye + 0.5 * h * op.matrix).tocsc())
    rhs_op = (eye - 0.5 * h * op.matrix).tocsr()
    drive = h * vf

    if config.duration is not None:
        max_steps = math.ceil(config.duration / dt)
    elif config.max_time is not None:
        max_steps = math.ceil(config.max_time / dt)
    else:
        max_steps = 10 ** 6

    u = np.full(n, float(config.initial_voltage))
    dist = [np.max(np.abs(u - u_inf))]
    snapshots = [(0.0, u.reshape(shape).copy())] if config.snapshot_every else []
    growing = 0
    stop_at = None
    for k in range(1, max_steps + 1):
        u = lhs.solve(rhs_op @ u + drive)
        d = np.max(np.abs(u - u_inf))
        growing = growing + 1 if d > dist[-1] else 0
        if growing >= 100:
            raise IntegratorUnstable(f"distance to steady state grew for 100 steps (t={k * dt:.3e} s)")
        dist.append(d)
        if config.snapshot_every and k % config.snapshot_every == 0:
            snapshots.append((k * dt, u.reshape(shape).copy()))
        if config.duration is None:
            # run 10% past the first drop below a tenth of the threshold to confirm settling
            if stop_at is None and d <= 0.1 * thr:
                stop_at = math.ceil(1.1 * k)
            if stop_at is not None and k >= stop_at:
                break

    dist = np.asarray(dist)
    times = np.arange(dist.size) * dt
    settle = _crossing(times, dist, thr)
    return TransientTrace(times=times, distance=dist, settle_time=settle, threshold=thr,
                          time_step=dt, steady_state=u_inf.reshape(shape),
                          final_state=u.reshape(shape), snapshots=snapshots)


def settle_time_vs_capacitance(spec, v, conductances: ConductanceSet, c_values,
                               base: TransientConfig | None = None):
    """One simulation per capacitance; returns rows of (C, settle_time)."""
    c_values = [float(c) for c in c_values]
    if any(not c > 0 for c in c_values):
        raise ValueError("capacitances must be positive")
    if any(b <= a for a, b in zip(c_values, c_values[1:])):
        raise ValueError("capacitances must be strictly ascending")
    base = base or TransientConfig(REFERENCE_CAPACITANCE)
    rows = []
    for c in c_values:
        cfg = TransientConfig(c, base.settle_fraction,
                              None if base.max_time is None else base.max_time * c / base.stray_capacitance,
                              base.integrator, base.step_fraction, base.initial_voltage)
        trace = simulate(spec, v, conductances, cfg)
        rows.append((c, trace.settle_time))
    return rows


def loglog_fit(rows):
    """Least-squares slope and R^2 of log(settle_time) against log(C)."""
    x = np.log([r[0] for r in rows])
    y = np.log([r[1] for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(r2)
