"""Ring deviation and fitted width for every stencil and boundary combination."""

from _common import write_csv

from resistive_sift.kernels import deviation_report_2d
from resistive_sift.network import BOUNDARIES, STENCILS, Smoother2DSpec


def main():
    rows = []
    for stencil in STENCILS:
        for boundary in BOUNDARIES:
            for lam in (4.0, 36.0, 120.0):
                s = deviation_report_2d(Smoother2DSpec(33, 33, lam, stencil, boundary)).summary()
                rows.append((stencil, boundary, lam, s["sigma_star"], s["first_ring_error_percent"],
                             s["max_outer_ring_error_percent"], s["max_error_ring"]))
                print(f"{stencil:>18s} {boundary:>8s} lambda {lam:5g}: sigma* {s['sigma_star']:.3f} "
                      f"ring1 {s['first_ring_error_percent']:6.2f}% outer {s['max_outer_ring_error_percent']:6.2f}% "
                      f"peak ring {s['max_error_ring']}")
    write_csv("ablation_stencil.csv", ["stencil", "boundary", "lambda", "sigma_star", "ring1_percent",
                                       "outer_max_percent", "max_error_ring"], rows)


if __name__ == "__main__":
    main()
