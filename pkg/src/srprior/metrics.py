"""PSNR and SSIM for grayscale images."""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, DimensionError
from .validation import check_image, check_same_shape


@dataclass(frozen=True)
class MetricConfig:
    dynamic_range: float = 1.0
    ssim_window: int = 11
    ssim_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03

    def __post_init__(self):
        if self.ssim_window < 3 or self.ssim_window % 2 == 0:
            raise ConfigurationError("ssim_window must be odd and at least 3")
        if not (self.k1 > 0 and self.k2 > 0 and self.dynamic_range > 0 and self.ssim_sigma > 0):
            raise ConfigurationError("k1, k2, dynamic_range and ssim_sigma must be positive")


DEFAULT_METRICS = MetricConfig()


def _pair(a, b):
    a = check_image(a, "a")
    b = check_image(b, "b")
    check_same_shape(a, b, ("a", "b"))
    return a, b


def psnr(a, b, cfg=DEFAULT_METRICS):
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    a, b = _pair(a, b)
    mse = np.mean((a - b) ** 2)
    if mse == 0:
        return math.inf
    return float(10.0 * np.log10(cfg.dynamic_range**2 / mse))


def gaussian_window(size, sigma):
    x = np.arange(size) - size // 2
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    g /= g.sum()
    return g


def _filter_valid(img, g):
    n = g.size
    rows, cols = img.shape
    tmp = sum(w * img[t:rows - n + 1 + t] for t, w in enumerate(g))
    return sum(w * tmp[:, t:cols - n + 1 + t] for t, w in enumerate(g))


def ssim_map(a, b, cfg=DEFAULT_METRICS):
    a, b = _pair(a, b)
    if min(a.shape) < cfg.ssim_window:
        raise DimensionError(f"images {a.shape} are smaller than the SSIM window")
    g = gaussian_window(cfg.ssim_window, cfg.ssim_sigma)
    c1 = (cfg.k1 * cfg.dynamic_range) ** 2
    c2 = (cfg.k2 * cfg.dynamic_range) ** 2
    mu_a = _filter_valid(a, g)
    mu_b = _filter_valid(b, g)
    var_a = _filter_valid(a * a, g) - mu_a * mu_a
    var_b = _filter_valid(b * b, g) - mu_b * mu_b
    cov = _filter_valid(a * b, g) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def ssim(a, b, cfg=DEFAULT_METRICS):
    """Mean structural similarity over valid Gaussian-weighted windows."""
    return float(np.mean(ssim_map(a, b, cfg)))
