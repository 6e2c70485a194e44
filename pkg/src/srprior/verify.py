"""Self-check suites: finite-difference gradient oracles and SVD/prior checks.

Each suite returns a list of :class:`Check` rows; ``srprior verify`` prints
them as a table and exits non-zero on any failure.
"""

import time
from dataclasses import dataclass

import numpy as np

from .imaging import gaussian_blur, synth_phantom
from .linalg import conv2d_backward, conv2d_same, svd
from .network import LayerSpec, backward, forward, init_params
from .priors import sharpness, sharpness_gradient, smooth_rank, smooth_rank_gradient
from .training import HyperParams, loss, loss_output_gradient

GRADIENT_TOL = 1e-5
SVD_TOL = 1e-10
RANK_TOL = 1e-8

TINY_NET = [LayerSpec(3, 3, 1, 3, "relu"), LayerSpec(1, 1, 3, 2, "relu"), LayerSpec(3, 3, 2, 1, "none")]


@dataclass
class Check:
    suite: str
    name: str
    passed: bool
    worst: float
    tolerance: float
    cases: int
    seconds: float

    def row(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}  {self.suite:<9} {self.name:<34} worst={self.worst:.3e} "
            f"tol={self.tolerance:.0e} cases={self.cases} ({self.seconds:.1f}s)"
        )


def relative_error(approx, exact):
    exact = np.asarray(exact, dtype=float)
    return float(np.max(np.abs(np.asarray(approx) - exact)) / max(np.max(np.abs(exact)), 1e-12))


def finite_difference(f, x, h=1e-5):
    """Central differences of scalar ``f`` at every entry of ``x``."""
    x = np.array(x, dtype=float)
    grad = np.empty_like(x)
    for idx in np.ndindex(x.shape):
        keep = x[idx]
        x[idx] = keep + h
        up = f(x)
        x[idx] = keep - h
        down = f(x)
        x[idx] = keep
        grad[idx] = (up - down) / (2 * h)
    return grad


def _run(suite, name, tol, cases, fn):
    started = time.perf_counter()
    worst = max(fn(i) for i in range(cases))
    return Check(suite, name, worst < tol, worst, tol, cases, time.perf_counter() - started)


def _sizes(i):
    return 6 + (i * 5) % 11, 6 + (i * 7) % 11


def gradient_suite(cases=20, seed=0):
    def conv_case(i):
        rng = np.random.default_rng((seed, 1, i))
        rows, cols = _sizes(i)
        depth = 1 + i % 3
        x = rng.standard_normal((depth, rows, cols))
        w = rng.standard_normal((2, depth, 3, 3))
        b = rng.standard_normal(2)
        up = 2 * conv2d_same(x, w, b)
        dx, dw, db = conv2d_backward(x, w, b, up)

        def f(x_=x, w_=w, b_=b):
            return float(np.sum(conv2d_same(x_, w_, b_) ** 2))

        return max(
            relative_error(dx, finite_difference(lambda v: f(x_=v), x)),
            relative_error(dw, finite_difference(lambda v: f(w_=v), w)),
            relative_error(db, finite_difference(lambda v: f(b_=v), b)),
        )

    def rank_case(i):
        rng = np.random.default_rng((seed, 2, i))
        delta = 0.1
        y = delta * rng.standard_normal(_sizes(i))
        fd = finite_difference(lambda v: smooth_rank(v, delta), y, h=1e-6)
        return relative_error(smooth_rank_gradient(y, delta), fd)

    def sharp_case(i):
        rng = np.random.default_rng((seed, 3, i))
        y = rng.random(_sizes(i))
        return relative_error(sharpness_gradient(y), finite_difference(sharpness, y))

    def network_case(i):
        rng = np.random.default_rng((seed, 4, i))
        hp = HyperParams(alpha=0.5, beta=0.2, delta=0.1)
        params = init_params(TINY_NET, seed * 1000 + i, std=0.4)
        for b in params.biases:
            b[:] = 0.1 * rng.standard_normal(b.shape)
        rows, cols = _sizes(i)
        x = rng.random((rows, cols))
        target = 0.2 * rng.random((rows, cols))
        y = forward(x, params).output
        grads = backward(forward(x, params), params, loss_output_gradient(y, target, hp))
        worst = 0.0
        for group, analytic in ((params.weights, grads.weights), (params.biases, grads.biases)):
            for l in range(len(group)):
                def f(v, group=group, l=l):
                    saved = group[l]
                    group[l] = v
                    try:
                        return loss(forward(x, params).output, target, hp).total
                    finally:
                        group[l] = saved
                worst = max(worst, relative_error(analytic[l], finite_difference(f, group[l])))
        return worst

    return [
        _run("gradients", "conv2d_backward vs FD", GRADIENT_TOL, cases, conv_case),
        _run("gradients", "smooth_rank_gradient vs FD", GRADIENT_TOL, cases, rank_case),
        _run("gradients", "sharpness_gradient vs FD", GRADIENT_TOL, cases, sharp_case),
        _run("gradients", "full parameter gradient vs FD", GRADIENT_TOL, cases, network_case),
    ]


def svd_suite(cases=100, seed=0, max_size=64):
    rng = np.random.default_rng((seed, 5))
    shapes = [tuple(rng.integers(1, max_size + 1, 2)) for _ in range(cases)]
    shapes[-1] = (max_size, max_size)
    mats = [rng.standard_normal(s) for s in shapes]
    cache = {}

    def factors(i):
        if i not in cache:
            cache[i] = svd(mats[i])
        return cache[i]

    def recon(i):
        return float(np.max(np.abs(factors(i).reconstruct() - mats[i])))

    def ortho(i):
        f = factors(i)
        r = f.sigma.size
        return float(max(np.max(np.abs(f.u.T @ f.u - np.eye(r))), np.max(np.abs(f.z.T @ f.z - np.eye(r)))))

    def eigen(i):
        a = mats[i]
        gram = a.T @ a if a.shape[0] >= a.shape[1] else a @ a.T
        ref = np.sqrt(np.clip(np.linalg.eigvalsh(gram), 0, None))[::-1]
        return float(np.max(np.abs(factors(i).sigma - ref)) / max(ref[0], 1.0))

    return [
        _run("svd", "reconstruction max-abs error", SVD_TOL, cases, recon),
        _run("svd", "orthonormality residual", SVD_TOL, cases, ortho),
        _run("svd", "sigma vs eigensolver on A^T A", 1e-8, cases, eigen),
    ]


def rank_exactness_cases(cases=30, seed=0, rows=16, cols=12):
    """Random exact-rank matrices with nonzero singular values >= 0.5."""
    out = []
    for i in range(cases):
        rng = np.random.default_rng((seed, 6, i))
        k = 1 + i % 3
        u = sum(
            np.outer(rng.standard_normal(rows), rng.standard_normal(cols)) for _ in range(k)
        )
        f = svd(u)
        # rescale the nonzero spectrum into [0.5, 3.5] while keeping rank k
        sig = np.zeros_like(f.sigma)
        sig[:k] = 0.5 + 3.0 * rng.random(k)
        out.append((k, (f.u * sig) @ f.z.T))
    return out


def priors_suite(seed=0):
    mats = rank_exactness_cases(seed=seed)

    def rank_case(i):
        k, a = mats[i]
        return abs(smooth_rank(a, 0.01) - k)

    def blur_case(i):
        img = synth_phantom(seed + i, 128)
        values = [sharpness(gaussian_blur(img, s)) for s in (0.5, 1.0, 1.5, 2.0, 2.5)]
        # negative margin means strictly decreasing
        return max(b - a for a, b in zip(values, values[1:]))

    checks = [_run("priors", "smooth_rank exact on rank k<=3", RANK_TOL, len(mats), rank_case)]
    blur = _run("priors", "blur sweep strictly decreasing", 0.0, 3, blur_case)
    checks.append(blur)
    return checks


SUITES = {
    "gradients": gradient_suite,
    "svd": svd_suite,
    "priors": priors_suite,
}


def run_suites(name, seed=0):
    if name == "all":
        return [c for fn in SUITES.values() for c in fn(seed=seed)]
    return SUITES[name](seed=seed)
