"""Structural priors on the network output: smooth rank and Laplacian sharpness.

The smooth rank counts singular values that are not negligible at the
scale ``delta``::

    smooth_rank(Y) = R - sum_i exp(-sigma_i**2 / (2 * delta**2)),  R = min(Y.shape)

Sharpness is the sample variance of the 3x3 Laplacian response, using
denominator ``rows * cols - 1``.
"""

import numpy as np

from .exceptions import ConfigurationError
from .linalg import svd
from .validation import check_image

LAPLACIAN_KERNEL = np.array(
    [[0.0, -1.0, 0.0],
     [-1.0, 4.0, -1.0],
     [0.0, -1.0, 0.0]]
)
LAPLACIAN_KERNEL.setflags(write=False)

DEFAULT_DELTA = 0.01


def _check_delta(delta):
    if not delta > 0:
        raise ConfigurationError(f"delta must be positive, got {delta}")
    return float(delta)


def smooth_rank(y, delta=DEFAULT_DELTA):
    """Differentiable rank approximation, in ``[0, min(rows, cols)]``."""
    delta = _check_delta(delta)
    y = check_image(y, "y")
    sigma = svd(y).sigma
    return float(sigma.size - np.exp(-(sigma**2) / (2.0 * delta**2)).sum())


def smooth_rank_gradient(y, delta=DEFAULT_DELTA):
    """Gradient of :func:`smooth_rank` with respect to ``y``.

    With ``y = U diag(sigma) Z^T`` this is
    ``-U diag(-sigma / delta**2 * exp(-sigma**2 / (2 delta**2))) Z^T``.
    Repeated singular values are used as-is.
    """
    return smooth_rank_and_gradient(y, delta)[1]


def _laplacian(y):
    p = 4.0 * y
    p[1:, :] -= y[:-1, :]
    p[:-1, :] -= y[1:, :]
    p[:, 1:] -= y[:, :-1]
    p[:, :-1] -= y[:, 1:]
    return p


def laplacian(y):
    """Zero-padded, same-size correlation of ``y`` with :data:`LAPLACIAN_KERNEL`."""
    return _laplacian(check_image(y, "y", min_size=3))


def sharpness(y):
    """Variance of the Laplacian (denominator ``rows * cols - 1``)."""
    p = laplacian(y)
    return float(np.var(p, ddof=1))


def sharpness_gradient(y):
    """Gradient of :func:`sharpness` with respect to ``y``.

    The derivative with respect to the Laplacian response is
    ``2 (p - mean(p)) / (K - 1)`` for ``K`` pixels; it is pulled back through
    the Laplacian by its adjoint, which for a symmetric stencil under zero
    padding is the same correlation.
    """
    return sharpness_and_gradient(y)[1]


def smooth_rank_and_gradient(y, delta=DEFAULT_DELTA):
    """:func:`smooth_rank` and its gradient from a single SVD."""
    delta = _check_delta(delta)
    f = svd(check_image(y, "y"))
    g = np.exp(-(f.sigma**2) / (2.0 * delta**2))
    value = float(f.sigma.size - g.sum())
    grad = -(f.u * (-(f.sigma / delta**2) * g)) @ f.z.T
    return value, grad


def sharpness_and_gradient(y):
    p = laplacian(y)
    dp = (2.0 / (p.size - 1)) * (p - p.mean())
    return float(np.var(p, ddof=1)), _laplacian(dp)
