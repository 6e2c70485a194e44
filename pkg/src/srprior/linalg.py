"""Numeric substrate: same-size 2-D convolution with its adjoint, and SVD.

Images are 2-D float64 arrays. Feature stacks are ``(depth, rows, cols)``
arrays. A convolution layer is described by a weight array of shape
``(kernel_count, depth, height, width)`` plus a bias vector of length
``kernel_count``. All convolutions are cross-correlations with zero padding,
so spatial size is preserved.
"""

from dataclasses import dataclass

import numba
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import ConfigurationError, ConvergenceError, DimensionError
from .validation import check_image, check_stack

SVD_MAX_SWEEPS = 60
SVD_TOL = 1e-12
SIGMA_FLOOR = 1e-14
# below this input depth im2col + one GEMM beats per-tap accumulation
_SHIFT_MIN_DEPTH = 8


def _check_kernels(weights, bias, depth):
    weights = np.asarray(weights, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64).reshape(-1)
    if weights.ndim != 4:
        raise DimensionError(f"weights must be (k, d, m, n), got {weights.shape}")
    k, d, m, n = weights.shape
    if d != depth:
        raise DimensionError(f"kernel depth {d} does not match input depth {depth}")
    if m % 2 == 0 or n % 2 == 0:
        raise ConfigurationError(f"kernel size must be odd, got {m}x{n}")
    if bias.shape != (k,):
        raise DimensionError(f"bias must have length {k}, got {bias.shape}")
    return weights, bias


def _im2col(x, m, n):
    d, rows, cols = x.shape
    padded = np.pad(x, ((0, 0), (m // 2, m // 2), (n // 2, n // 2)))
    win = sliding_window_view(padded, (m, n), axis=(1, 2))
    return win.transpose(1, 2, 0, 3, 4).reshape(rows * cols, d * m * n)


def conv2d_same(x, weights, bias):
    """Zero-padded same-size cross-correlation of a feature stack.

    ``out[c] = sum_d x[d] * weights[c, d] + bias[c]`` where ``*`` is
    cross-correlation.

    Parameters
    ----------
    x : ndarray, shape (d, rows, cols)
        Input stack. A 2-D image is treated as depth 1.
    weights : ndarray, shape (k, d, m, n)
        Filters with odd ``m`` and ``n``.
    bias : ndarray, shape (k,)

    Returns
    -------
    ndarray, shape (k, rows, cols)
    """
    x = check_stack(x, "input")
    weights, bias = _check_kernels(weights, bias, x.shape[0])
    return _conv_forward(x, weights, bias)


def _shifted_views(x, m, n):
    """Flattened zero-padded input and the flat offset of each kernel tap.

    For tap ``(i, j)`` the contiguous slice ``flat[:, off:off + span]`` lines
    up with output positions on a grid of width ``cols + n - 1``; columns
    beyond ``cols`` are discarded afterwards.
    """
    d, rows, cols = x.shape
    ph, pw = m // 2, n // 2
    padded = np.pad(x, ((0, 0), (ph, ph + 1), (pw, pw)))
    wide = cols + 2 * pw
    flat = padded.reshape(d, -1)
    offsets = [i * wide + j for i in range(m) for j in range(n)]
    return flat, offsets, rows * wide, wide


def _conv_forward(x, weights, bias):
    k, d, m, n = weights.shape
    _, rows, cols = x.shape
    if m == 1 and n == 1:
        out = (weights.reshape(k, d) @ x.reshape(d, rows * cols)).reshape(k, rows, cols)
    elif d < _SHIFT_MIN_DEPTH:
        out = (weights.reshape(k, -1) @ _im2col(x, m, n).T).reshape(k, rows, cols)
    else:
        flat, offsets, span, wide = _shifted_views(x, m, n)
        taps = weights.reshape(k, d, m * n)
        acc = np.zeros((k, span))
        for t, off in enumerate(offsets):
            acc += taps[:, :, t] @ flat[:, off:off + span]
        out = acc.reshape(k, rows, wide)[:, :, :cols].copy()
    out += bias[:, None, None]
    return out


def conv2d_backward(x, weights, bias, upstream, need_input_grad=True):
    """Gradients of a scalar loss through :func:`conv2d_same`.

    Parameters
    ----------
    x, weights, bias
        Same arguments as the forward call.
    upstream : ndarray, shape (k, rows, cols)
        Gradient of the loss with respect to the forward output.
    need_input_grad : bool
        Skip the input gradient (returned as ``None``) when False.

    Returns
    -------
    input_grad : ndarray, shape (d, rows, cols) or None
    weight_grad : ndarray, shape (k, d, m, n)
    bias_grad : ndarray, shape (k,)
    """
    x = check_stack(x, "input")
    weights, bias = _check_kernels(weights, bias, x.shape[0])
    upstream = check_stack(upstream, "upstream gradient")
    expected = (weights.shape[0],) + x.shape[1:]
    if upstream.shape != expected:
        raise DimensionError(f"upstream gradient must be {expected}, got {upstream.shape}")
    return _conv_backward(x, weights, upstream, need_input_grad)


def _conv_backward(x, weights, upstream, need_input_grad=True):
    k, d, m, n = weights.shape
    _, rows, cols = x.shape
    g = upstream.reshape(k, rows * cols)
    if m == 1 and n == 1:
        weight_grad = (g @ x.reshape(d, rows * cols).T).reshape(weights.shape)
    elif d < _SHIFT_MIN_DEPTH:
        weight_grad = (g @ _im2col(x, m, n)).reshape(weights.shape)
    else:
        flat, offsets, span, wide = _shifted_views(x, m, n)
        g_wide = np.zeros((k, rows, wide))
        g_wide[:, :, :cols] = upstream
        g_wide = g_wide.reshape(k, span)
        weight_grad = np.empty((k, d, m * n))
        for t, off in enumerate(offsets):
            weight_grad[:, :, t] = g_wide @ flat[:, off:off + span].T
        weight_grad = weight_grad.reshape(weights.shape)
    bias_grad = g.sum(axis=1)
    input_grad = None
    if need_input_grad:
        # adjoint of same-size correlation: correlate with flipped, transposed filters
        adjoint = np.ascontiguousarray(weights[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
        input_grad = _conv_forward(upstream, adjoint, np.zeros(d))
    return input_grad, weight_grad, bias_grad


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``a = u @ diag(sigma) @ z.T`` with ``R = min(rows, cols)``."""

    u: np.ndarray
    sigma: np.ndarray
    z: np.ndarray

    def reconstruct(self):
        return (self.u * self.sigma) @ self.z.T


@numba.njit(cache=True)
def _jacobi_sweeps(cols_t, vecs_t, max_sweeps, tol, skip_norm):
    # cols_t rows are the working columns; vecs_t rows accumulate right vectors.
    n, m = cols_t.shape
    residual = 0.0
    for sweep in range(max_sweeps):
        residual = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for r in range(m):
                    a = cols_t[i, r]
                    b = cols_t[j, r]
                    alpha += a * a
                    beta += b * b
                    gamma += a * b
                if gamma == 0.0 or alpha <= skip_norm or beta <= skip_norm:
                    continue
                off = abs(gamma) / np.sqrt(alpha * beta)
                if off > residual:
                    residual = off
                if off <= tol:
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = 1.0 / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                if zeta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                for r in range(m):
                    a = cols_t[i, r]
                    b = cols_t[j, r]
                    cols_t[i, r] = c * a - s * b
                    cols_t[j, r] = s * a + c * b
                for r in range(n):
                    a = vecs_t[i, r]
                    b = vecs_t[j, r]
                    vecs_t[i, r] = c * a - s * b
                    vecs_t[j, r] = s * a + c * b
        if residual <= tol:
            return sweep + 1, residual
    return -1, residual


def _complete_basis(u, known):
    """Fill columns of ``u`` not flagged in ``known`` with an orthonormal complement."""
    rows = u.shape[0]
    basis = [u[:, i] for i in range(u.shape[1]) if known[i]]
    candidate = 0
    for i in np.flatnonzero(~known):
        while True:
            v = np.zeros(rows)
            v[candidate % rows] = 1.0
            candidate += 1
            for _ in range(2):
                for b in basis:
                    v -= (b @ v) * b
            norm = np.linalg.norm(v)
            if norm > 1e-6:
                break
        u[:, i] = v / norm
        basis.append(u[:, i])
    return u


def svd(a):
    """Thin singular value decomposition by one-sided Jacobi rotations.

    Parameters
    ----------
    a : array-like, shape (rows, cols)

    Returns
    -------
    SvdFactors
        ``sigma`` is sorted descending and values below ``1e-14`` are
        clamped to zero. Columns of ``u`` and ``z`` are orthonormal, also
        for zero singular values.

    Raises
    ------
    NumericError
        If ``a`` contains NaN or infinite entries.
    ConvergenceError
        If the off-diagonal mass is still above tolerance after 60 sweeps.
    """
    a = check_image(a, "matrix")
    transposed = a.shape[0] < a.shape[1]
    work = a.T if transposed else a
    rows, r = work.shape

    scale = np.linalg.norm(work)
    skip_norm = (1e-15 * scale) ** 2 if scale > 0 else 0.0
    cols_t = np.array(work.T, order="C")
    vecs_t = np.eye(r)
    sweeps, residual = _jacobi_sweeps(cols_t, vecs_t, SVD_MAX_SWEEPS, SVD_TOL, skip_norm)
    if sweeps < 0:
        raise ConvergenceError("Jacobi SVD did not converge", residual)

    sigma = np.sqrt(np.einsum("ij,ij->i", cols_t, cols_t))
    floor = max(SIGMA_FLOOR, 1e-15 * scale)
    known = sigma > floor
    sigma = np.where(known, sigma, 0.0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    known = known[order]
    u = np.zeros((rows, r))
    u[:, known] = cols_t[order][known].T / sigma[known]
    u = _complete_basis(u, known)
    z = np.ascontiguousarray(vecs_t[order].T)

    if transposed:
        u, z = z, u
    return SvdFactors(u=u, sigma=sigma, z=z)
