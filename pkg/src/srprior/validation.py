"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numpy as np

from .exceptions import DimensionError, NumericError


def check_image(img, name="image", min_size=1):
    """Return ``img`` as a finite, C-contiguous 2-D float64 array.

    Parameters
    ----------
    img : array-like
        Grayscale intensities.
    name : str
        Used in error messages.
    min_size : int
        Minimum number of rows and columns.
    """
    arr = np.ascontiguousarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < min_size or arr.shape[1] < min_size:
        raise DimensionError(
            f"{name} must be at least {min_size}x{min_size}, got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite values")
    return arr


def check_stack(x, name="feature stack"):
    """Return ``x`` as a finite (depth, rows, cols) float64 array."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[np.newaxis]
    if arr.ndim != 3 or 0 in arr.shape:
        raise DimensionError(f"{name} must be (depth, rows, cols), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite values")
    return arr


def check_same_shape(a, b, names=("a", "b")):
    if a.shape != b.shape:
        raise DimensionError(
            f"{names[0]} and {names[1]} differ in shape: {a.shape} vs {b.shape}"
        )


def check_image_list(images, name="images", min_size=1):
    """Validate a sequence of images; a 3-D array is split along axis 0."""
    if isinstance(images, np.ndarray) and images.ndim == 2:
        images = [images]
    return [check_image(im, f"{name}[{i}]", min_size) for i, im in enumerate(images)]
