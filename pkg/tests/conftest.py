import numpy as np
import pytest


def rel_err(approx, exact):
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    return float(np.max(np.abs(approx - exact)) / max(np.max(np.abs(exact)), 1e-12))


def central_diff(f, x, h=1e-5):
    """Central finite-difference gradient of scalar ``f`` at array ``x``."""
    x = np.array(x, dtype=float)
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        orig = x[idx]
        x[idx] = orig + h
        fp = f(x)
        x[idx] = orig - h
        fm = f(x)
        x[idx] = orig
        grad[idx] = (fp - fm) / (2 * h)
    return grad


def conv_reference(x, w, b):
    """Direct loop over output pixels, channels and taps."""
    k, d, m, n = w.shape
    _, rows, cols = x.shape
    out = np.zeros((k, rows, cols))
    for c in range(k):
        for r in range(rows):
            for q in range(cols):
                acc = b[c]
                for ch in range(d):
                    for i in range(m):
                        for j in range(n):
                            rr, qq = r + i - m // 2, q + j - n // 2
                            if 0 <= rr < rows and 0 <= qq < cols:
                                acc += w[c, ch, i, j] * x[ch, rr, qq]
                out[c, r, q] = acc
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
