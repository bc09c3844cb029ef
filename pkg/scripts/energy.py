"""Pyramid energy on the 256x256 test image across full-scale voltages."""

from _common import DATA, write_csv

from resistive_sift.pgm import read_pgm
from resistive_sift.power import REFERENCE_PYRAMID_ENERGY, pyramid_energy


def main():
    img = read_pgm(DATA / "camera256.pgm")
    rows = []
    for full_scale in (0.1, 0.255, 0.5, 1.0):
        pe = pyramid_energy(img, settle_time=1e-9, full_scale=full_scale)
        rows.append((full_scale, pe.energy, pe.active_energy, pe.reference_ratio))
        print(f"full scale {full_scale:5.3f} V: {pe.energy * 1e12:9.3f} pJ "
              f"(active branches {pe.active_energy * 1e12:8.3f} pJ), ratio to reference {pe.reference_ratio:.4f}")
    print(f"reference: {REFERENCE_PYRAMID_ENERGY * 1e12:.1f} pJ; pixels per lambda: "
          f"{sorted(set(pe.pixels_per_lambda().values()))}")
    write_csv("energy.csv", ["full_scale_V", "energy_J", "active_energy_J", "reference_ratio"], rows)
    write_csv("energy_levels_1V.csv", ["lambda", "octave", "rows", "cols", "source_power_W",
                                       "per_pixel_power_W", "active_power_W", "energy_J"], pe.rows())


if __name__ == "__main__":
    main()
