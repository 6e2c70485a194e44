"""Acceptance criteria, each checked at its stated tolerance.

Every test records one ``PASS``/``FAIL`` line; the lines are printed in the
terminal summary. The training criteria (6, 7, 9) share module-scoped runs
and take roughly ten minutes on one CPU core.

Training settings shared by the end-to-end runs (see README):
init_std 0.05, eta 1e-4, batch 4, stride 40 on 40x40 patches, 200 epochs,
alpha 0.01 (picked on a held-out phantom set disjoint from the test set),
beta 5e-5, delta 0.01.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from srprior import verify
from srprior.imaging import DegradationSpec, degrade, gaussian_blur, make_training_pairs, simulate_lowres, synth_phantom
from srprior.metrics import psnr, ssim
from srprior.network import dumps_params, get_profile
from srprior.priors import sharpness, smooth_rank
from srprior.training import HyperParams, infer, subsample_pairs, train

DEGRADATION = DegradationSpec(blur_sigma=1.0, scale=2)
TRAIN_SEEDS = range(8)
TEST_SEEDS = range(200, 204)
RUN_HP = dict(eta=1e-4, init_std=0.05, batch_size=4, epochs=200, seed=0, alpha=0.01, beta=5e-5, delta=0.01)
FRACTIONS = (0.25, 0.5, 0.75, 1.0)


def record(number, title, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  criterion {number}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


# 1 -------------------------------------------------------------------------

def test_criterion_1_gradient_oracles():
    started = time.perf_counter()
    checks = verify.gradient_suite(cases=20)
    elapsed = time.perf_counter() - started
    worst = max(c.worst for c in checks)
    ok = all(c.passed for c in checks) and elapsed < 60 and all(c.cases >= 20 for c in checks)
    names = ", ".join(f"{c.name.split()[0]}={c.worst:.1e}" for c in checks)
    assert record(1, "gradients vs central differences < 1e-5", ok, f"{names}; worst {worst:.1e}; {elapsed:.1f}s")


# 2 -------------------------------------------------------------------------

def test_criterion_2_rank_surrogate_exact():
    cases = verify.rank_exactness_cases(cases=30)
    errs = [abs(smooth_rank(a, 0.01) - k) for k, a in cases]
    ranks = sorted({k for k, _ in cases})
    ok = max(errs) < 1e-8 and ranks == [1, 2, 3]
    assert record(2, "|smooth_rank - k| < 1e-8", ok, f"{len(cases)} matrices, max err {max(errs):.1e}")


# 3 -------------------------------------------------------------------------

def test_criterion_3_blur_sweep_decreasing():
    img = synth_phantom(0, 128)
    sigmas = (0.5, 1.0, 1.5, 2.0, 2.5)
    values = [sharpness(gaussian_blur(img, s)) for s in sigmas]
    ordered = sum(b < a for a, b in zip(values, values[1:]))
    ok = ordered == len(sigmas) - 1
    detail = ", ".join(f"{v:.3e}" for v in values)
    # five sigmas give four adjacent pairs; all of them must drop
    assert record(3, "variance of Laplacian strictly decreasing in blur", ok, f"{ordered}/4 adjacent drops: {detail}")


# 4 -------------------------------------------------------------------------

def test_criterion_4_svd_quality():
    started = time.perf_counter()
    checks = verify.svd_suite(cases=100, max_size=64)[:2]
    elapsed = time.perf_counter() - started
    ok = all(c.passed for c in checks) and elapsed < 30
    detail = f"recon {checks[0].worst:.1e}, ortho {checks[1].worst:.1e}, {elapsed:.1f}s"
    assert record(4, "SVD reconstruction and orthonormality < 1e-10", ok, detail)


# 5 -------------------------------------------------------------------------

def test_criterion_5_ablation_identity():
    pairs = make_training_pairs([synth_phantom(s, 128) for s in range(2)], DEGRADATION, 40, 40)
    hp = HyperParams(**{**RUN_HP, "epochs": 3, "alpha": 0.0, "beta": 0.0})
    zero_weights, _ = train(pairs, get_profile("915"), hp, priors=True)
    disabled, _ = train(pairs, get_profile("915"), hp, priors=False)
    hp_full = HyperParams(**{**RUN_HP, "epochs": 3})
    disabled_full, _ = train(pairs, get_profile("915"), hp_full, priors=False)
    same = dumps_params(zero_weights) == dumps_params(disabled) == dumps_params(disabled_full)
    assert record(5, "alpha=beta=0 checkpoint bit-identical to priors-off path", same, f"{len(pairs)} pairs, 3 epochs")


# 8 -------------------------------------------------------------------------

def _ssim_brute(a, b, size=11, sigma=1.5):
    x = np.arange(size) - size // 2
    g = np.exp(-(x**2) / (2 * sigma**2))
    w = np.outer(g, g) / np.sum(np.outer(g, g))
    c1, c2 = 0.01**2, 0.03**2
    vals = []
    for r in range(a.shape[0] - size + 1):
        for c in range(a.shape[1] - size + 1):
            pa, pb = a[r:r + size, c:c + size], b[r:r + size, c:c + size]
            ma, mb = np.sum(w * pa), np.sum(w * pb)
            va, vb = np.sum(w * (pa - ma) ** 2), np.sum(w * (pb - mb) ** 2)
            cov = np.sum(w * (pa - ma) * (pb - mb))
            vals.append((2 * ma * mb + c1) * (2 * cov + c2) / ((ma**2 + mb**2 + c1) * (va + vb + c2)))
    return float(np.mean(vals))


def test_criterion_8_metrics():
    rng = np.random.default_rng(8)
    a = rng.random((32, 32))
    b = np.clip(a + 0.05 * rng.standard_normal(a.shape), 0, 1)
    p20 = psnr(a, a + 0.1)
    p255 = psnr(a, a + 1 / 255)
    s_same = ssim(a, a)
    s_err = abs(ssim(a, b) - _ssim_brute(a, b))
    ok = abs(p20 - 20.0) < 1e-9 and abs(p255 - 48.13) <= 0.01 and s_same == 1.0 and s_err < 1e-9
    detail = f"psnr {p20:.12f} / {p255:.4f} dB, ssim(a,a)={s_same!r}, ssim err {s_err:.1e}"
    assert record(8, "PSNR closed forms, SSIM identity and brute-force match", ok, detail)


# 6, 7, 9 -------------------------------------------------------------------

@pytest.fixture(scope="module")
def data():
    train_imgs = [synth_phantom(s, 128) for s in TRAIN_SEEDS]
    test_imgs = [synth_phantom(s, 128) for s in TEST_SEEDS]
    pairs = make_training_pairs(train_imgs, DEGRADATION, 40, 40)
    lows = [simulate_lowres(t, DEGRADATION) for t in test_imgs]
    bicubic = float(np.mean([psnr(degrade(t, DEGRADATION), t) for t in test_imgs]))
    return pairs, test_imgs, lows, bicubic


class _Runs:
    def __init__(self, data):
        self.pairs, self.test_imgs, self.lows, self.bicubic = data
        self.cache = {}

    def get(self, priors, fraction=1.0):
        key = (priors, fraction)
        if key not in self.cache:
            pairs = self.pairs if fraction == 1.0 else subsample_pairs(self.pairs, fraction, seed=0)
            started = time.perf_counter()
            params, report = train(pairs, get_profile("915"), HyperParams(**RUN_HP), priors=priors)
            elapsed = time.perf_counter() - started
            score = float(np.mean([psnr(infer(x, params, 2), t) for x, t in zip(self.lows, self.test_imgs)]))
            self.cache[key] = (params, report, score, elapsed)
        return self.cache[key]


@pytest.fixture(scope="module")
def runs(data):
    return _Runs(data)


def test_criterion_6_end_to_end(runs):
    _, _, prior, t_prior = runs.get(True)
    _, _, ablation, t_abl = runs.get(False)
    gain = prior - runs.bicubic
    ok_a = gain >= 0.5
    ok_b = prior >= ablation - 0.05
    direction = "priors > ablation" if prior > ablation else "priors <= ablation"
    detail = (
        f"bicubic {runs.bicubic:.3f}, priors {prior:.3f} (+{gain:.3f}), ablation {ablation:.3f} dB; "
        f"{direction}; {len(runs.pairs)} pairs; {t_prior + t_abl:.0f}s"
    )
    record("6a", "prior-trained net beats bicubic by >= 0.5 dB", ok_a, detail)
    record("6b", "prior-trained net >= ablation - 0.05 dB", ok_b, detail)
    assert ok_a and ok_b and t_prior + t_abl < 1800


def test_criterion_7_training_fraction(runs):
    prior = [runs.get(True, f)[2] for f in FRACTIONS]
    abl = [runs.get(False, f)[2] for f in FRACTIONS]
    monotone = all(b >= a for a, b in zip(prior, prior[1:]))
    drop_prior, drop_abl = prior[-1] - prior[0], abl[-1] - abl[0]
    graceful = drop_prior <= drop_abl
    detail = (
        "priors " + "/".join(f"{v:.3f}" for v in prior)
        + "; ablation " + "/".join(f"{v:.3f}" for v in abl)
        + f" dB; drops {drop_prior:.3f} vs {drop_abl:.3f}"
    )
    record("7a", "prior-trained PSNR non-decreasing over 25/50/75/100%", monotone, detail)
    record("7b", "prior-trained 100%->25% drop <= ablation drop", graceful, detail)
    assert monotone and graceful


def test_criterion_9_determinism(runs):
    params, report, _, _ = runs.get(True)
    again, again_report = train(runs.pairs, get_profile("915"), HyperParams(**RUN_HP), priors=True)
    same_ckpt = dumps_params(params) == dumps_params(again)
    same_report = report.to_csv(include_timing=False) == again_report.to_csv(include_timing=False)
    detail = f"checkpoint {'identical' if same_ckpt else 'differs'}, report {'identical' if same_report else 'differs'} (timing column excluded)"
    assert record(9, "repeat run byte-identical", same_ckpt and same_report, detail)
