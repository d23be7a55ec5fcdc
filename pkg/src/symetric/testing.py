"""Numerical cross-check helpers shared by the test suites."""

import numpy as np


def finite_difference_gradient(f, x, h=1e-6):
    """Central-difference gradient of scalar f at x."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def finite_difference_jacobian(f, x, h=1e-5):
    """Central-difference Jacobian of vector-valued f at x, shape (out, in)."""
    x = np.asarray(x, dtype=np.float64)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * h))
    return np.stack(cols, axis=1)
