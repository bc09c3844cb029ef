"""Command-line drivers: impulse, filter, pyramid, sift, transient, power.

Every command writes CSV tables (9 significant digits), a ``summary.json`` record and a
``manifest.json`` into its output directory. The default directory comes from the
``RESISTIVE_SIFT_OUT`` environment variable, falling back to ``./runs/<command>``.
"""

import argparse
import hashlib
import json
import os
import re
import sys
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .kernels import REFERENCE_LAMBDAS, deviation_report_1d, deviation_report_2d, lambda_sigma_curve
from .network import BOUNDARIES, STENCILS, Smoother1DSpec, Smoother2DSpec, conductances_from_lambda
from .pgm import read_pgm, write_pgm
from .power import DEFAULT_FULL_SCALE, DEFAULT_R1, REFERENCE_PYRAMID_ENERGY, pyramid_energy
from .sift import PyramidConfig, build_pyramid, run_sift
from .solver import filter_image
from .transient import (REFERENCE_SETTLE_TIMES, TransientConfig, loglog_fit,
                        settle_time_vs_capacitance)

OUT_ENV = "RESISTIVE_SIFT_OUT"
_PREFIX = {"f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "m": 1e-3, "": 1.0,
           "k": 1e3, "M": 1e6}
_UNITS = {"ohm": ("Ω", "ohm", "ohms", "R"), "farad": ("F",), "second": ("s",), "volt": ("V",)}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([fpnuµmkM]?)(\S*)\s*$")


def parse_quantity(text: str, unit: str) -> float:
    """'250Ω' -> 250.0, '0.1pF' -> 1e-13, '2ns' -> 2e-9; a bare number is taken in SI units."""
    m = _QUANTITY.match(text)
    if not m:
        raise ValueError(f"cannot parse {text!r} as a quantity")
    value, prefix, suffix = m.groups()
    if suffix == "" and prefix == "m" and unit == "ohm":  # '1m' is ambiguous; refuse it
        raise ValueError(f"{text!r}: give an explicit unit")
    if suffix and suffix not in _UNITS[unit]:
        # a lone 'm'/'M' style suffix would have been captured as a prefix already
        raise ValueError(f"{text!r}: expected a {unit} quantity")
    return float(value) * _PREFIX[prefix]


def _quantity_arg(unit: str, positive: bool = True):
    def parse(text):
        try:
            x = parse_quantity(text, unit)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
        if positive and not x > 0:
            raise argparse.ArgumentTypeError(f"{text!r} must be positive")
        return x
    return parse


def _quantity_list(unit: str):
    single = _quantity_arg(unit)

    def parse(text):
        values = [single(t) for t in text.split(",") if t.strip()]
        if not values:
            raise argparse.ArgumentTypeError("empty list")
        return values
    return parse


def _nonneg_float(text):
    x = float(text)
    if not x >= 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be nonnegative")
    return x


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return "" if x is None else str(x)


class Run:
    """Collects outputs of one command and writes the manifest beside them."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.args = args
        default = Path(os.environ.get(OUT_ENV, "runs")) / command
        self.out = Path(args.out) if args.out else default
        self.out.mkdir(parents=True, exist_ok=True)
        self.outputs = []
        self.inputs = {}
        self.config = {}

    def input(self, path):
        digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        self.inputs[str(path)] = digest

    def path(self, name: str) -> Path:
        p = self.out / name
        self.outputs.append(str(p))
        return p

    def csv(self, name: str, header, rows):
        lines = [",".join(header)] + [",".join(fmt(x) for x in row) for row in rows]
        self.path(name).write_text("\n".join(lines) + "\n")

    def json(self, name: str, record):
        self.path(name).write_text(json.dumps(_plain(record), indent=2, sort_keys=True) + "\n")

    def finish(self, summary: dict):
        self.json("summary.json", summary)
        manifest = {"command": self.command, "version": __version__,
                    "config": _plain({**{k: v for k, v in vars(self.args).items()
                                         if k not in ("func", "out")}, **self.config}),
                    "inputs": self.inputs, "outputs": self.outputs + [str(self.out / "manifest.json")]}
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _plain(x):
    if is_dataclass(x):
        return _plain(asdict(x))
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(f"{float(x):.9g}")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, Path):
        return str(x)
    return x


def _load(run: Run, path) -> np.ndarray:
    run.input(path)
    return read_pgm(path)


def cmd_impulse(args) -> int:
    run = Run("impulse", args)
    if args.dim == 1:
        rep = deviation_report_1d(args.nodes, args.lam, args.boundary)
        run.csv("impulse.csv", ["node", "response", "fitted", "error_percent", "in_support"],
                rep.rows())
        summary = rep.summary()
        print(f"sigma* = {rep.sigma_star:.4f}, mean error {rep.mean_error:.3f}%, "
              f"max error {rep.max_error:.3f}% (reference: mean about 1.31%)")
    else:
        spec = Smoother2DSpec(args.rows, args.cols, args.lam, args.stencil, args.boundary)
        rep = deviation_report_2d(spec)
        run.csv("rings.csv", ["ring", "error_percent"], rep.rows())
        r, c = rep.response.shape
        run.csv("response.csv", ["row", "col", "response", "fitted"],
                [(i, j, rep.response[i, j], rep.fitted[i, j]) for i in range(r) for j in range(c)])
        summary = rep.summary()
        print(f"sigma* = {rep.sigma_star:.4f}, first ring {rep.ring_errors[1]:.2f}% "
              f"(reference: about 12% to 16%), outer max {rep.ring_errors[2:].max():.2f}%")
    run.finish(summary)
    return 0


def cmd_filter(args) -> int:
    run = Run("filter", args)
    img = _load(run, args.image)
    spec = Smoother2DSpec(*img.shape, args.lam, args.stencil, args.boundary)
    out = filter_image(img, args.lam, spec)
    write_pgm(run.path("filtered.pgm"), out)
    np.save(run.path("filtered.npy"), out)
    run.finish({"lambda": args.lam, "shape": list(img.shape),
                "max_change": float(np.max(np.abs(out - img)))})
    return 0


def _pyramid_config(args) -> PyramidConfig:
    if args.backend == "network":
        return PyramidConfig(octaves=args.octaves, backend="resistor_network",
                             lams=tuple(args.lams), stencil=args.stencil, boundary=args.boundary,
                             workers=args.workers)
    sigmas = None
    if args.ideal_sigmas == "fitted":
        sigmas = tuple(row[1] for row in lambda_sigma_curve(args.lams))
    return PyramidConfig(octaves=args.octaves, backend="ideal_gaussian", sigmas=sigmas,
                         scales=len(args.lams), workers=args.workers)


def cmd_pyramid(args) -> int:
    run = Run("pyramid", args)
    img = _load(run, args.image)
    cfg = _pyramid_config(args)
    run.config["pyramid"] = cfg
    pyr = build_pyramid(img, cfg)
    rows = []
    for o, stack in enumerate(pyr):
        for s, level in enumerate(stack):
            write_pgm(run.path(f"octave{o}_scale{s}.pgm"), level)
            rows.append((o, s, cfg.widths()[s], level.shape[0], level.shape[1], level.var()))
    run.csv("levels.csv", ["octave", "scale", "width", "rows", "cols", "variance"], rows)
    run.finish({"images": len(rows), "backend": cfg.backend})
    print(f"wrote {len(rows)} images to {run.out}")
    return 0


def cmd_sift(args) -> int:
    run = Run("sift", args)
    img = _load(run, args.image)
    cfg = _pyramid_config(args)
    run.config["pyramid"] = cfg
    res = run_sift(img, cfg)
    run.csv("keypoints.csv",
            ["octave", "scale", "x", "y", "image_x", "image_y", "polarity", "value", "orientation"],
            [(k.octave, k.scale, k.x, k.y, *k.image_xy, k.polarity, k.value, k.orientation)
             for k in res.keypoints])
    d = res.descriptors
    run.csv("descriptors.csv", [f"k{i}" for i in range(d.shape[1])] or ["empty"], d.tolist())
    shares = res.timing_shares()
    summary = {"backend": cfg.backend, "keypoints": len(res.keypoints),
               "descriptor_shape": list(d.shape), "dropped": dict(res.dropped),
               "timing_seconds": res.timings, "timing_share": shares}
    run.finish(summary)
    print(f"{len(res.keypoints)} keypoints, descriptor matrix {d.shape[0]}x{d.shape[1]}")
    for stage, share in shares.items():
        print(f"  {stage:<20s} {100 * share:6.2f}%")
    return 0


def cmd_transient(args) -> int:
    run = Run("transient", args)
    cs = conductances_from_lambda(args.lam, args.r1)
    spec = Smoother1DSpec(args.nodes, args.lam, args.boundary)
    v = np.zeros(args.nodes)
    if args.input == "impulse":
        v[args.nodes // 2] = args.amplitude
    else:
        v[:] = args.amplitude
    c_values = sorted(args.c)
    base = TransientConfig(c_values[0], args.settle_fraction, integrator=args.integrator)
    rows = settle_time_vs_capacitance(spec, v, cs, c_values, base)
    table = [(c, t, REFERENCE_SETTLE_TIMES.get(_match_reference(c))) for c, t in rows]
    run.csv("settle.csv", ["capacitance_F", "settle_time_s", "reference_settle_time_s"], table)
    summary = {"rows": [{"capacitance_F": c, "settle_time_s": t} for c, t in rows]}
    if len(rows) >= 2 and all(t for _, t in rows):
        slope, r2 = loglog_fit(rows)
        summary.update(loglog_slope=slope, r2=r2)
    run.finish(summary)
    print(f"{'C':>10s} {'settle':>12s} {'reference':>10s}")
    for c, t, p in table:
        ref = f"{p * 1e9:.3f} ns" if p else "-"
        settle = f"{t * 1e9:.4g} ns" if t is not None else "did not settle"
        print(f"{c * 1e12:8.4g}pF {settle:>12s} {ref:>10s}")
    return 0


def _match_reference(c: float):
    for ref in REFERENCE_SETTLE_TIMES:
        if abs(c - ref) <= 1e-9 * ref:
            return ref
    return None


def cmd_power(args) -> int:
    run = Run("power", args)
    img = _load(run, args.image)
    pe = pyramid_energy(img, args.settle, tuple(args.lams), args.octaves, args.full_scale,
                        args.r1, args.stencil, args.boundary)
    run.csv("power.csv", ["lambda", "octave", "rows", "cols", "source_power_W",
                          "per_pixel_power_W", "active_power_W", "energy_J"], pe.rows())
    counts = pe.pixels_per_lambda()
    worst = max(lv.report.conservation_error for lv in pe.levels)
    summary = {"energy_J": pe.energy, "reference_energy_J": REFERENCE_PYRAMID_ENERGY,
               "reference_ratio": pe.reference_ratio, "active_energy_J": pe.active_energy,
               "total_power_W": pe.total_power, "pixels_per_lambda": counts,
               "max_conservation_error": worst, "full_scale_V": args.full_scale,
               "settle_time_s": args.settle}
    run.finish(summary)
    for lam, n in counts.items():
        print(f"lambda {lam:g}: {n} pixels")
    print(f"energy: {pe.energy * 1e12:.4f} pJ at {args.full_scale:g} V full scale, "
          f"{args.settle * 1e9:g} ns settle")
    print(f"paper: {REFERENCE_PYRAMID_ENERGY * 1e12:.1f} pJ (ratio {pe.reference_ratio:.4g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="resistive-sift", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<command>)")
        sp.add_argument("--boundary", choices=BOUNDARIES, default="mirror")
        sp.add_argument("--stencil", choices=STENCILS, default="diagonal_augmented")

    sp = sub.add_parser("impulse", help="impulse response and Gaussian-fit deviation")
    common(sp)
    sp.add_argument("--dim", type=int, choices=(1, 2), default=1)
    sp.add_argument("--nodes", type=int, default=45)
    sp.add_argument("--rows", type=int, default=33)
    sp.add_argument("--cols", type=int, default=33)
    sp.add_argument("--lambda", dest="lam", type=_nonneg_float, default=36.0)
    sp.set_defaults(func=cmd_impulse)

    sp = sub.add_parser("filter", help="filter one PGM image with the network")
    common(sp)
    sp.add_argument("image")
    sp.add_argument("--lambda", dest="lam", type=_nonneg_float, default=36.0)
    sp.set_defaults(func=cmd_filter)

    for name, func, helptext in (("pyramid", cmd_pyramid, "write every filtered pyramid level"),
                                 ("sift", cmd_sift, "keypoints and 128-D descriptors")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("image")
        sp.add_argument("--backend", choices=("ideal", "network"), default="ideal")
        sp.add_argument("--octaves", type=int, default=3)
        sp.add_argument("--lams", type=_quantity_list_plain, default=list(REFERENCE_LAMBDAS),
                        help="comma-separated lambda per scale")
        sp.add_argument("--ideal-sigmas", choices=("standard", "fitted"), default="standard",
                        help="ideal backend widths: 1.6 * 2**(i/S), or sigmas fitted to --lams")
        sp.add_argument("--workers", type=int, default=1)
        sp.set_defaults(func=func)

    sp = sub.add_parser("transient", help="settle time against stray capacitance")
    sp.add_argument("--out")
    sp.add_argument("--boundary", choices=BOUNDARIES, default="mirror")
    sp.add_argument("--c", type=_quantity_list("farad"), default=sorted(REFERENCE_SETTLE_TIMES),
                    help="comma-separated capacitances, e.g. 0.1pF,1pF,10fF")
    sp.add_argument("--nodes", type=int, default=45)
    sp.add_argument("--lambda", dest="lam", type=_nonneg_float, default=36.0)
    sp.add_argument("--r1", type=_quantity_arg("ohm"), default=DEFAULT_R1)
    sp.add_argument("--input", choices=("impulse", "step"), default="impulse")
    sp.add_argument("--amplitude", type=_quantity_arg("volt"), default=1.0)
    sp.add_argument("--settle-fraction", type=float, default=0.01)
    sp.add_argument("--integrator", choices=("implicit_trapezoidal", "exponential_scaling"),
                    default="implicit_trapezoidal")
    sp.set_defaults(func=cmd_transient)

    sp = sub.add_parser("power", help="steady power and pyramid energy")
    common(sp)
    sp.add_argument("image")
    sp.add_argument("--settle", type=_quantity_arg("second"), default=1e-9)
    sp.add_argument("--full-scale", type=_quantity_arg("volt"), default=DEFAULT_FULL_SCALE)
    sp.add_argument("--r1", type=_quantity_arg("ohm"), default=DEFAULT_R1)
    sp.add_argument("--octaves", type=int, default=3)
    sp.add_argument("--lams", type=_quantity_list_plain, default=list(REFERENCE_LAMBDAS))
    sp.set_defaults(func=cmd_power)
    return p


def _quantity_list_plain(text):
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not values or any(not x > 0 for x in values):
        raise argparse.ArgumentTypeError("need a nonempty list of positive numbers")
    return values


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
