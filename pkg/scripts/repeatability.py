"""Keypoint overlap between the ideal and network backends.

Runs on the committed 64x64 and 256x256 test images. With scikit-image installed it also
sweeps other natural images (center crop, resized to 64x64) to show how image-dependent
the overlap is.
"""

import numpy as np
from _common import DATA, write_csv

from resistive_sift.kernels import REFERENCE_LAMBDAS, lambda_sigma_curve
from resistive_sift.pgm import read_pgm
from resistive_sift.sift import PyramidConfig, detect_keypoints, repeatability, run_sift


def compare(img, sigmas):
    ideal = run_sift(img, PyramidConfig(sigmas=sigmas))
    net = run_sift(img, PyramidConfig(backend="resistor_network"))
    thr = 0.005 * float(img.max() - img.min())
    ci, cn = detect_keypoints(ideal.dog, thr), detect_keypoints(net.dog, thr)
    rng = float(img.max() - img.min()) or 1.0
    diff = max(np.abs(a - b)[:, 2:-2, 2:-2].max() for a, b in zip(ideal.pyramid, net.pyramid)) / rng
    return (len(ideal.keypoints), len(net.keypoints), repeatability(ideal.keypoints, net.keypoints),
            len(ci), len(cn), repeatability(ci, cn), diff)


def extra_images():
    try:
        from skimage import color, data, transform
    except ImportError:
        return {}
    out = {}
    for name in ("astronaut", "coins", "moon", "text", "page", "brick", "coffee", "chelsea", "horse"):
        im = getattr(data, name)().astype(float)
        if im.ndim == 3:
            im = color.rgb2gray(im[..., :3]) * 255
        m = min(im.shape)
        out[name] = transform.resize(im[:m, :m], (64, 64), anti_aliasing=True, preserve_range=True)
    return out


def main():
    sigmas = tuple(r[1] for r in lambda_sigma_curve(REFERENCE_LAMBDAS))
    images = {"camera64": read_pgm(DATA / "camera64.pgm"), "camera256": read_pgm(DATA / "camera256.pgm")}
    images.update(extra_images())
    rows = []
    print(f"{'image':>10s} {'ideal':>5s} {'net':>5s} {'repeat':>6s} | {'cand':>4s} {'cand':>4s} "
          f"{'repeat':>6s} | max level diff")
    for name, img in images.items():
        r = compare(img, sigmas)
        rows.append((name, *r))
        print(f"{name:>10s} {r[0]:5d} {r[1]:5d} {r[2]:6.2f} | {r[3]:4d} {r[4]:4d} {r[5]:6.2f} | "
              f"{100 * r[6]:.1f}% of range")
    write_csv("repeatability.csv", ["image", "ideal_keypoints", "network_keypoints", "repeatability",
                                    "ideal_candidates", "network_candidates", "candidate_repeatability",
                                    "max_level_difference"], rows)


if __name__ == "__main__":
    main()
