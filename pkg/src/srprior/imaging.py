"""Low-resolution simulation, bicubic resampling, patching, phantoms and PGM IO."""

import logging
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError, DimensionError, FormatError
from .validation import check_image

logger = logging.getLogger(__name__)

BICUBIC_A = -0.5


@dataclass(frozen=True)
class DegradationSpec:
    """Gaussian blur followed by decimation by ``scale``."""

    blur_sigma: float = 1.0
    scale: int = 2

    def __post_init__(self):
        if not self.blur_sigma > 0:
            raise ConfigurationError(f"blur_sigma must be positive, got {self.blur_sigma}")
        if int(self.scale) != self.scale or self.scale < 1:
            raise ConfigurationError(f"scale must be a positive integer, got {self.scale}")

    @property
    def radius(self):
        return math.ceil(3 * self.blur_sigma)


def gaussian_kernel(sigma):
    """Normalized 1-D Gaussian of radius ``ceil(3 * sigma)``."""
    if not sigma > 0:
        raise ConfigurationError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    return k / k.sum()


def _correlate_axis(img, kernel, axis):
    r = kernel.size // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (r, r)
    # half-sample symmetric padding keeps the total intensity unchanged
    padded = np.pad(img, pad, mode="symmetric")
    out = np.zeros_like(img)
    n = img.shape[axis]
    for t, w in enumerate(kernel):
        out += w * (padded[t:t + n] if axis == 0 else padded[:, t:t + n])
    return out


def gaussian_blur(img, sigma):
    """Separable Gaussian blur with symmetric (reflect) padding, same size."""
    kernel = gaussian_kernel(sigma)
    img = check_image(img)
    return _correlate_axis(_correlate_axis(img, kernel, 0), kernel, 1)


def downsample(img, s):
    """Keep every ``s``-th pixel starting at index 0."""
    img = check_image(img)
    if s < 1 or img.shape[0] % s or img.shape[1] % s:
        raise DimensionError(f"image shape {img.shape} is not divisible by {s}")
    return img[::s, ::s].copy()


def cubic_kernel(t, a=BICUBIC_A):
    """Keys cubic convolution kernel."""
    t = np.abs(t)
    return np.where(
        t <= 1,
        (a + 2) * t**3 - (a + 3) * t**2 + 1,
        np.where(t < 2, a * t**3 - 5 * a * t**2 + 8 * a * t - 4 * a, 0.0),
    )


def _reflect_index(idx, n):
    period = 2 * n
    idx = np.mod(idx, period)
    return np.where(idx < n, idx, period - 1 - idx)


def bicubic_matrix(n, s):
    """Interpolation matrix of shape ``(s * n, n)``.

    Output sample ``q`` sits at input coordinate ``q / s``, so input pixel
    ``i`` coincides with output pixel ``s * i`` (the grid kept by
    :func:`downsample`).
    """
    pos = np.arange(s * n) / s
    base = np.floor(pos).astype(int)
    frac = pos - base
    mat = np.zeros((s * n, n))
    rows = np.arange(s * n)
    for tap in range(-1, 3):
        w = cubic_kernel(frac - tap)
        np.add.at(mat, (rows, _reflect_index(base + tap, n)), w)
    return mat


def bicubic_upscale(img, s):
    """Upscale by integer factor ``s`` with the Keys (a = -0.5) kernel."""
    img = check_image(img)
    if int(s) != s or s < 1:
        raise ConfigurationError(f"scale must be a positive integer, got {s}")
    s = int(s)
    if s == 1:
        return img.copy()
    return bicubic_matrix(img.shape[0], s) @ img @ bicubic_matrix(img.shape[1], s).T


def degrade(img, spec):
    """Blur, decimate and bicubic-upscale back to (cropped) original size."""
    img = modcrop(check_image(img), spec.scale)
    low = downsample(gaussian_blur(img, spec.blur_sigma), spec.scale)
    return bicubic_upscale(low, spec.scale)


def simulate_lowres(img, spec):
    img = modcrop(check_image(img), spec.scale)
    return downsample(gaussian_blur(img, spec.blur_sigma), spec.scale)


def modcrop(img, s):
    rows = img.shape[0] - img.shape[0] % s
    cols = img.shape[1] - img.shape[1] % s
    return img[:rows, :cols]


@dataclass
class PatchSet:
    """Aligned (network input, target) patches.

    ``locations`` holds ``(image_index, row, col)`` for each pair and
    ``skipped`` counts images too small to yield a patch.
    """

    inputs: list = field(default_factory=list)
    targets: list = field(default_factory=list)
    locations: list = field(default_factory=list)
    skipped: int = 0

    def __len__(self):
        return len(self.inputs)

    def subset(self, indices):
        return PatchSet(
            [self.inputs[i] for i in indices],
            [self.targets[i] for i in indices],
            [self.locations[i] for i in indices],
            self.skipped,
        )


def _grid(n, patch, stride):
    return range(0, n - patch + 1, stride)


def make_training_pairs(hires, spec=None, patch=40, stride=20):
    """Cut aligned patches from degraded inputs and their originals.

    Parameters
    ----------
    hires : sequence of 2-D arrays
        Ground-truth images; each is cropped to a multiple of the scale.
    spec : DegradationSpec
    patch, stride : int
        Patch side length and grid step, in output pixels.
    """
    spec = spec or DegradationSpec()
    if patch < 1 or stride < 1:
        raise ConfigurationError("patch and stride must be positive")
    out = PatchSet()
    for idx, img in enumerate(hires):
        target = modcrop(check_image(img, f"hires[{idx}]"), spec.scale)
        if target.shape[0] < patch or target.shape[1] < patch:
            out.skipped += 1
            continue
        source = degrade(target, spec)
        for r in _grid(target.shape[0], patch, stride):
            for c in _grid(target.shape[1], patch, stride):
                out.inputs.append(source[r:r + patch, c:c + patch].copy())
                out.targets.append(target[r:r + patch, c:c + patch].copy())
                out.locations.append((idx, r, c))
    if out.skipped:
        logger.warning("skipped %d image(s) smaller than %dx%d", out.skipped, patch, patch)
    return out


def _soft_ellipse(yy, xx, cy, cx, ay, ax, theta, edge):
    c, s = math.cos(theta), math.sin(theta)
    u = ((xx - cx) * c + (yy - cy) * s) / ax
    v = (-(xx - cx) * s + (yy - cy) * c) / ay
    rad = np.sqrt(u**2 + v**2)
    # signed distance approximated in pixels along the minor axis
    return 1.0 / (1.0 + np.exp((rad - 1.0) * min(ax, ay) / edge))


def synth_phantom(seed, size=128):
    """Deterministic brain-like test image with values in [0, 1].

    Nested soft ellipses (scalp, cortex, white matter, ventricles) with
    seeded jitter, a handful of small inclusions, and low-amplitude smooth
    texture.
    """
    if size < 64:
        raise ConfigurationError(f"phantom size must be at least 64, got {size}")
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    c = size / 2.0 + rng.uniform(-0.03, 0.03, 2) * size
    rot = rng.uniform(-0.2, 0.2)
    edge = 0.6

    def jitter(lo, hi):
        return rng.uniform(lo, hi) * size

    img = np.zeros((size, size))
    layers = [
        # (semi-axis y, semi-axis x, intensity)
        (jitter(0.44, 0.47), jitter(0.36, 0.40), 0.95),   # scalp
        (jitter(0.40, 0.42), jitter(0.32, 0.34), 0.10),   # skull / CSF gap
        (jitter(0.37, 0.39), jitter(0.29, 0.31), 0.55),   # gray matter
        (jitter(0.29, 0.32), jitter(0.21, 0.24), 0.80),   # white matter
    ]
    for ay, ax, val in layers:
        mask = _soft_ellipse(yy, xx, c[0], c[1], ay, ax, rot, edge)
        img = img * (1 - mask) + val * mask

    # ventricles: a mirrored pair of small tilted ellipses
    for side in (-1, 1):
        cy = c[0] + jitter(-0.04, 0.02)
        cx = c[1] + side * jitter(0.04, 0.07)
        mask = _soft_ellipse(
            yy, xx, cy, cx, jitter(0.09, 0.13), jitter(0.025, 0.04), rot + side * 0.35, edge
        )
        img = img * (1 - mask) + 0.25 * mask

    # small inclusions inside the brain
    for _ in range(rng.integers(4, 8)):
        ang = rng.uniform(0, 2 * np.pi)
        rad = rng.uniform(0.08, 0.26) * size
        cy, cx = c[0] + rad * math.sin(ang), c[1] + rad * math.cos(ang) * 0.8
        mask = _soft_ellipse(
            yy, xx, cy, cx, jitter(0.015, 0.04), jitter(0.015, 0.04), rng.uniform(0, np.pi), edge
        )
        img = img * (1 - mask) + rng.uniform(0.35, 0.7) * mask

    noise = gaussian_blur(rng.standard_normal((size, size)), 1.5)
    noise /= max(np.abs(noise).max(), 1e-12)
    brain = _soft_ellipse(yy, xx, c[0], c[1], layers[0][0], layers[0][1], rot, edge)
    img = img + 0.03 * noise * brain
    return np.clip(img, 0.0, 1.0)


_PGM_HEADER = re.compile(rb"P5(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)\s")


def read_pgm(path):
    """Read a binary PGM (P5) file as float64 intensities in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    match = _PGM_HEADER.match(data)
    if not match:
        raise FormatError(f"{path}: not a binary PGM (P5) file")
    width, height, maxval = (int(g) for g in match.groups())
    if not 0 < maxval <= 65535:
        raise FormatError(f"{path}: invalid maxval {maxval}")
    dtype = ">u1" if maxval < 256 else ">u2"
    count = width * height
    raw = np.frombuffer(data, dtype=dtype, count=count, offset=match.end()) \
        if len(data) - match.end() >= count * np.dtype(dtype).itemsize else None
    if raw is None:
        raise FormatError(f"{path}: truncated pixel data")
    return raw.reshape(height, width).astype(np.float64) / maxval


def write_pgm(path, img, maxval=255):
    """Write intensities in [0, 1] as binary PGM; values are clipped."""
    img = check_image(img)
    if maxval not in (255, 65535):
        raise ConfigurationError("maxval must be 255 or 65535")
    dtype = ">u1" if maxval == 255 else ">u2"
    pixels = np.rint(np.clip(img, 0.0, 1.0) * maxval).astype(dtype)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + pixels.tobytes())
