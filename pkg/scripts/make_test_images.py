"""Regenerate the natural test images in tests/data from scikit-image's camera photo.

Needs scikit-image (not a package dependency). The outputs are committed.
"""

from pathlib import Path

import numpy as np
from skimage import data

from resistive_sift.pgm import write_pgm

OUT = Path(__file__).resolve().parents[1] / "tests" / "data"


def block_mean(img, f):
    h, w = img.shape
    return img.reshape(h // f, f, w // f, f).mean(axis=(1, 3))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    cam = data.camera().astype(float)  # 512 x 512
    write_pgm(OUT / "camera256.pgm", block_mean(cam, 2))
    write_pgm(OUT / "camera64.pgm", block_mean(cam, 8))
    print("wrote", sorted(p.name for p in OUT.glob("*.pgm")))


if __name__ == "__main__":
    main()
