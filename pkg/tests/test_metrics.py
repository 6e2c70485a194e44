import math

import numpy as np
import pytest

from srprior.exceptions import ConfigurationError, DimensionError
from srprior.metrics import MetricConfig, psnr, ssim


def ssim_reference(a, b, size=11, sigma=1.5, k1=0.01, k2=0.03, L=1.0):
    x = np.arange(size) - size // 2
    g = np.exp(-(x**2) / (2 * sigma**2))
    w = np.outer(g, g)
    w /= w.sum()
    c1, c2 = (k1 * L) ** 2, (k2 * L) ** 2
    vals = []
    for r in range(a.shape[0] - size + 1):
        for c in range(a.shape[1] - size + 1):
            pa = a[r:r + size, c:c + size]
            pb = b[r:r + size, c:c + size]
            ma, mb = np.sum(w * pa), np.sum(w * pb)
            va = np.sum(w * (pa - ma) ** 2)
            vb = np.sum(w * (pb - mb) ** 2)
            cov = np.sum(w * (pa - ma) * (pb - mb))
            vals.append((2 * ma * mb + c1) * (2 * cov + c2) / ((ma**2 + mb**2 + c1) * (va + vb + c2)))
    return float(np.mean(vals))


def test_psnr_closed_forms(rng):
    a = rng.random((16, 16))
    assert psnr(a, a) == math.inf
    assert psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-9)
    assert psnr(a, a + 1 / 255) == pytest.approx(48.13, abs=0.01)
    assert psnr(a, a + 1 / 255) == pytest.approx(20 * math.log10(255), abs=1e-9)


def test_psnr_symmetric_and_monotone(rng):
    a, b = rng.random((12, 12)), rng.random((12, 12))
    assert psnr(a, b) == psnr(b, a)
    noise = rng.standard_normal((12, 12))
    values = [psnr(a, a + amp * noise) for amp in (0.01, 0.02, 0.05, 0.1, 0.2)]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_psnr_dimension_mismatch():
    with pytest.raises(DimensionError):
        psnr(np.zeros((4, 4)), np.zeros((4, 5)))


def test_ssim_identical_is_exactly_one(rng):
    a = rng.random((20, 24))
    assert ssim(a, a) == 1.0


def test_ssim_anticorrelated_binary(rng):
    a = (rng.random((32, 32)) > 0.5).astype(float)
    assert ssim(a, 1 - a) < 0.1


def test_ssim_matches_brute_force(rng):
    a = rng.random((18, 21))
    assert abs(ssim(a, a + 0.05) - ssim_reference(a, a + 0.05)) < 1e-9
    b = np.clip(a + 0.1 * rng.standard_normal(a.shape), 0, 1)
    assert abs(ssim(a, b) - ssim_reference(a, b)) < 1e-9


def test_ssim_symmetric_bounded(rng):
    a, b = rng.random((16, 16)), rng.random((16, 16))
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-15)
    assert -1 <= ssim(a, b) < 1


def test_ssim_window_constraints():
    with pytest.raises(DimensionError):
        ssim(np.zeros((10, 10)), np.zeros((10, 10)))
    with pytest.raises(ConfigurationError):
        MetricConfig(ssim_window=4)
    small = MetricConfig(ssim_window=3, ssim_sigma=0.8)
    assert ssim(np.ones((5, 5)), np.ones((5, 5)), small) == 1.0
