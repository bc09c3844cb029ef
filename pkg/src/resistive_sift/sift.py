"""SIFT feature extraction with a swappable Gaussian-filter backend.

``ideal_gaussian`` convolves with sampled Gaussians; ``resistor_network`` replaces each
convolution with the steady state of the 2-D active resistor network. Everything after
the pyramid is shared.
"""

import math
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from scipy import ndimage

from .kernels import REFERENCE_LAMBDAS, gaussian_kernel_1d
from .network import Smoother2DSpec
from .solver import SolveConfig, filter_image

Backend = Literal["ideal_gaussian", "resistor_network"]
MIN_TOP_OCTAVE = 8
STAGES = ("gaussian_pyramid", "dog", "keypoint_detection", "orientation", "descriptor")


@dataclass(frozen=True)
class PyramidConfig:
    octaves: int = 3
    scales: int = 6
    backend: Backend = "ideal_gaussian"
    base_sigma: float = 1.6
    sigmas: tuple | None = None  # ideal backend; default base_sigma * k**i
    lams: tuple = REFERENCE_LAMBDAS  # network backend, reused unchanged in every octave
    stencil: str = "diagonal_augmented"
    boundary: str = "mirror"
    solve: SolveConfig = field(default_factory=SolveConfig)
    workers: int = 1

    def __post_init__(self):
        if self.scales < 3:
            raise ValueError("need at least 3 scales per octave for DoG extrema")
        if self.octaves < 1:
            raise ValueError("need at least one octave")
        if self.backend not in ("ideal_gaussian", "resistor_network"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.sigmas is not None and len(self.sigmas) != self.scales:
            raise ValueError(f"expected {self.scales} sigmas, got {len(self.sigmas)}")
        if self.backend == "resistor_network" and len(self.lams) != self.scales:
            raise ValueError(f"expected {self.scales} lambdas, got {len(self.lams)}")

    @property
    def k(self) -> float:
        return 2.0 ** (1.0 / self.scales)

    def sigma_list(self) -> list:
        if self.sigmas is not None:
            return [float(s) for s in self.sigmas]
        return [self.base_sigma * self.k ** i for i in range(self.scales)]

    def widths(self) -> list:
        """Per-scale width parameter: sigma (ideal) or lambda (network)."""
        if self.backend == "ideal_gaussian":
            return self.sigma_list()
        return [float(x) for x in self.lams]


@dataclass(frozen=True)
class SiftConfig:
    contrast_threshold: float | None = None  # None: 0.5% of the input's dynamic range
    orientation_bins: int = 36
    orientation_radius: int = 8
    orientation_sigma: float = 4.0
    orientation_peak_ratio: float = 0.8
    descriptor_window: int = 16
    descriptor_cells: int = 4
    descriptor_bins: int = 8
    descriptor_sigma: float = 8.0
    descriptor_clamp: float = 0.2
    gradient_level_offset: int = 1  # DoG level j reads filtered level j + offset


@dataclass
class Keypoint:
    octave: int
    scale: int  # DoG level index
    x: int  # column, octave coordinates
    y: int  # row
    polarity: int  # +1 maximum, -1 minimum
    value: float  # DoG value at the extremum
    orientation: float | None = None  # radians in [0, 2 pi)

    @property
    def image_xy(self) -> tuple:
        f = 2 ** self.octave
        return (self.x * f, self.y * f)


def validate_image(image) -> np.ndarray:
    img = np.asarray(image, dtype=float)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("image must be a non-empty 2-D array")
    if not np.all(np.isfinite(img)):
        raise ValueError("image has non-finite pixels")
    if np.any(img < 0):
        raise ValueError("image has negative pixels")
    return img


def octave_shape(shape, octave: int) -> tuple:
    f = 2 ** octave
    return tuple(-(-s // f) for s in shape)


def gaussian_blur(image, sigma: float) -> np.ndarray:
    kernel = gaussian_kernel_1d(sigma)
    out = ndimage.correlate1d(image, kernel, axis=0, mode="reflect")
    return ndimage.correlate1d(out, kernel, axis=1, mode="reflect")


def build_pyramid(image, config: PyramidConfig | None = None) -> list:
    """Per octave, an (S, H, W) stack of filtered images in ascending width.

    Octave o filters the source decimated by 2**o (every 2**o-th pixel).
    """
    config = config or PyramidConfig()
    img = validate_image(image)
    top = octave_shape(img.shape, config.octaves - 1)
    if min(top) < MIN_TOP_OCTAVE:
        raise ValueError(f"image {img.shape} too small: top octave {top} is below the "
                         f"{MIN_TOP_OCTAVE}x{MIN_TOP_OCTAVE} floor")
    widths = config.widths()

    def level(o, w):
        src = img[::2 ** o, ::2 ** o]
        if config.backend == "ideal_gaussian":
            return gaussian_blur(src, w)
        spec = Smoother2DSpec(*src.shape, w, config.stencil, config.boundary)
        return filter_image(src, w, spec, config.solve)

    jobs = [(o, w) for o in range(config.octaves) for w in widths]
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as ex:
            levels = list(ex.map(lambda job: level(*job), jobs))
    else:
        levels = [level(o, w) for o, w in jobs]
    S = config.scales
    return [np.stack(levels[o * S:(o + 1) * S]) for o in range(config.octaves)]


def build_dog(pyramid) -> list:
    """Differences of consecutive filtered images: level j = M[j + 1] - M[j]."""
    return [octave[1:] - octave[:-1] for octave in pyramid]


_NEIGHBORS = np.ones((3, 3, 3), dtype=bool)
_NEIGHBORS[1, 1, 1] = False


def detect_keypoints(dog, contrast_threshold: float = 0.0) -> list:
    """Strict extrema among the 26 space-scale neighbors with |value| >= threshold.

    Outermost DoG levels and border pixels are never keypoints.
    """
    keypoints = []
    for o, stack in enumerate(dog):
        if stack.shape[0] < 3:
            continue
        hi = ndimage.maximum_filter(stack, footprint=_NEIGHBORS, mode="nearest")
        lo = ndimage.minimum_filter(stack, footprint=_NEIGHBORS, mode="nearest")
        inner = np.zeros(stack.shape, dtype=bool)
        inner[1:-1, 1:-1, 1:-1] = True
        strong = np.abs(stack) >= contrast_threshold
        for polarity, mask in ((1, stack > hi), (-1, stack < lo)):
            s, y, x = np.nonzero(mask & inner & strong)
            for si, yi, xi in zip(s, y, x):
                keypoints.append(Keypoint(o, int(si), int(xi), int(yi), polarity,
                                          float(stack[si, yi, xi])))
    keypoints.sort(key=lambda k: (k.octave, k.scale, k.y, k.x))
    return keypoints


def gradients(image) -> tuple:
    """Central-difference gradients (dx along columns, dy along rows); zero on the border."""
    img = np.asarray(image, dtype=float)
    dx = np.zeros_like(img)
    dy = np.zeros_like(img)
    dx[:, 1:-1] = 0.5 * (img[:, 2:] - img[:, :-2])
    dy[1:-1, :] = 0.5 * (img[2:, :] - img[:-2, :])
    return dx, dy


def orientation_histogram(image, x: int, y: int, cfg: SiftConfig = SiftConfig()) -> np.ndarray:
    r = cfg.orientation_radius
    oy, ox = np.mgrid[-r:r + 1, -r:r + 1]
    disc = ox ** 2 + oy ** 2 <= r * r
    patch = np.asarray(image, dtype=float)[y - r - 1:y + r + 2, x - r - 1:x + r + 2]
    dx, dy = gradients(patch)
    dx, dy = dx[1:-1, 1:-1][disc], dy[1:-1, 1:-1][disc]
    mag = np.hypot(dx, dy)
    weight = mag * np.exp(-(ox[disc] ** 2 + oy[disc] ** 2) / (2 * cfg.orientation_sigma ** 2))
    width = 2 * np.pi / cfg.orientation_bins
    # bins are centered on multiples of the bin width
    bins = np.rint(np.mod(np.arctan2(dy, dx), 2 * np.pi) / width).astype(int) % cfg.orientation_bins
    return np.bincount(bins, weights=weight, minlength=cfg.orientation_bins)


def assign_orientation(kp: Keypoint, filtered, cfg: SiftConfig = SiftConfig()):
    """Oriented copies of ``kp`` (one per dominant histogram peak), or ([], reason)."""
    h, w = np.shape(filtered)
    r = cfg.orientation_radius
    if not (r + 1 <= kp.x < w - r - 1 and r + 1 <= kp.y < h - r - 1):
        return [], "orientation_border"
    hist = orientation_histogram(filtered, kp.x, kp.y, cfg)
    top = hist.max()
    if not top > 0:
        return [], "zero_gradient"
    n = cfg.orientation_bins
    width = 2 * np.pi / n
    left, right = np.roll(hist, 1), np.roll(hist, -1)
    peaks = [b for b in range(n)
             if hist[b] >= cfg.orientation_peak_ratio * top and hist[b] > left[b] and hist[b] >= right[b]]
    if not peaks:  # flat-topped maximum
        peaks = [int(np.argmax(hist))]
    peaks.sort(key=lambda b: -hist[b])
    return [replace(kp, orientation=b * width) for b in peaks], None


def _clamp_unit(vec: np.ndarray, clamp: float):
    """Unit vector min(c * vec, clamp): the fixed point of clamp-then-renormalize.

    Returns None when fewer than 1/clamp**2 components are nonzero (no such vector).
    """
    nonzero = np.count_nonzero(vec)
    if nonzero * clamp ** 2 < 1.0 - 1e-12:
        return None
    order = np.sort(vec)[::-1]
    tail = np.cumsum((order ** 2)[::-1])[::-1]  # tail[k] = sum of squares from index k on
    for k in range(nonzero):  # k = number of clamped components
        c = math.sqrt(max(1.0 - k * clamp ** 2, 0.0) / tail[k])
        if c * order[k] <= clamp:
            return np.minimum(c * vec, clamp)
    return np.where(vec > 0, clamp, 0.0)


def make_descriptor(kp: Keypoint, filtered, cfg: SiftConfig = SiftConfig()):
    """128-vector for an oriented keypoint, or (None, reason).

    The 16x16 window is rotated to the keypoint orientation and split into 4x4 cells,
    each holding an 8-bin histogram of gradient angle relative to that orientation.
    Layout is cell-major (row of cells, then column), bin-minor.
    """
    img = np.asarray(filtered, dtype=float)
    h, w = img.shape
    half = cfg.descriptor_window / 2
    reach = math.ceil(half * math.sqrt(2))
    if not (reach + 1 <= kp.x < w - reach - 1 and reach + 1 <= kp.y < h - reach - 1):
        return None, "descriptor_border"
    theta = kp.orientation or 0.0
    oy, ox = np.mgrid[-reach:reach + 1, -reach:reach + 1]
    c, s = math.cos(theta), math.sin(theta)
    rx = c * ox + s * oy
    ry = -s * ox + c * oy
    inside = (rx >= -half) & (rx < half) & (ry >= -half) & (ry < half)
    patch = img[kp.y - reach - 1:kp.y + reach + 2, kp.x - reach - 1:kp.x + reach + 2]
    dx, dy = gradients(patch)
    dx, dy = dx[1:-1, 1:-1][inside], dy[1:-1, 1:-1][inside]
    rx, ry = rx[inside], ry[inside]
    mag = np.hypot(dx, dy) * np.exp(-(rx ** 2 + ry ** 2) / (2 * cfg.descriptor_sigma ** 2))
    rel = np.mod(np.arctan2(dy, dx) - theta, 2 * np.pi)
    nb, nc = cfg.descriptor_bins, cfg.descriptor_cells
    cell_size = cfg.descriptor_window / nc
    b = np.minimum((rel / (2 * np.pi / nb)).astype(int), nb - 1)
    col = np.clip(((rx + half) // cell_size).astype(int), 0, nc - 1)
    row = np.clip(((ry + half) // cell_size).astype(int), 0, nc - 1)
    vec = np.bincount((row * nc + col) * nb + b, weights=mag, minlength=nc * nc * nb)
    norm = np.linalg.norm(vec)
    if not norm > 0:
        return None, "zero_gradient"
    out = _clamp_unit(vec / norm, cfg.descriptor_clamp)
    if out is None:
        return None, "too_few_bins"
    return out, None


@dataclass
class SiftResult:
    keypoints: list
    descriptors: np.ndarray  # 128 x N
    timings: dict
    dropped: Counter
    pyramid: list = field(repr=False)
    dog: list = field(repr=False)

    def timing_shares(self) -> dict:
        total = sum(self.timings.values())
        return {k: (v / total if total > 0 else 0.0) for k, v in self.timings.items()}


def run_sift(image, config: PyramidConfig | None = None, sift: SiftConfig | None = None) -> SiftResult:
    config = config or PyramidConfig()
    sift = sift or SiftConfig()
    img = validate_image(image)
    timings = {}

    t = time.perf_counter()
    pyramid = build_pyramid(img, config)
    timings["gaussian_pyramid"] = time.perf_counter() - t

    t = time.perf_counter()
    dog = build_dog(pyramid)
    timings["dog"] = time.perf_counter() - t

    t = time.perf_counter()
    threshold = sift.contrast_threshold
    if threshold is None:
        threshold = 0.005 * float(img.max() - img.min())
    candidates = detect_keypoints(dog, threshold)
    timings["keypoint_detection"] = time.perf_counter() - t

    dropped = Counter()
    t = time.perf_counter()
    oriented = []
    for kp in candidates:
        level = pyramid[kp.octave][kp.scale + sift.gradient_level_offset]
        kps, reason = assign_orientation(kp, level, sift)
        if reason:
            dropped[reason] += 1
        oriented.extend(kps)
    timings["orientation"] = time.perf_counter() - t

    t = time.perf_counter()
    kept, vecs = [], []
    for kp in oriented:
        level = pyramid[kp.octave][kp.scale + sift.gradient_level_offset]
        vec, reason = make_descriptor(kp, level, sift)
        if reason:
            dropped[reason] += 1
            continue
        kept.append(kp)
        vecs.append(vec)
    timings["descriptor"] = time.perf_counter() - t

    n_desc = sift.descriptor_cells ** 2 * sift.descriptor_bins
    descriptors = np.array(vecs).T if vecs else np.zeros((n_desc, 0))
    return SiftResult(kept, descriptors, timings, dropped, pyramid, dog)


def keypoint_locations(keypoints) -> np.ndarray:
    """Unique keypoint positions in input-image pixel coordinates, shape (M, 2)."""
    pts = {kp.image_xy for kp in keypoints}
    return np.array(sorted(pts), dtype=float).reshape(-1, 2)


def repeatability(a, b, tolerance: float = 2.0) -> float:
    """Fraction of all locations in A and B that have a partner in the other set.

    ``a`` and ``b`` are keypoint lists or (M, 2) location arrays; a partner lies within
    ``tolerance`` pixels (Euclidean).
    """
    pa = a if isinstance(a, np.ndarray) else keypoint_locations(a)
    pb = b if isinstance(b, np.ndarray) else keypoint_locations(b)
    if len(pa) == 0 and len(pb) == 0:
        return 1.0
    if len(pa) == 0 or len(pb) == 0:
        return 0.0
    d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(-1))
    close = d <= tolerance
    matched = close.any(axis=1).sum() + close.any(axis=0).sum()
    return float(matched) / (len(pa) + len(pb))
