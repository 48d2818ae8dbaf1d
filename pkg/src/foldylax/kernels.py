"""Helmholtz kernels and direction grids.

Conventions used throughout the package:

    Phi_kappa(x, y) = exp(i*kappa*|x - y|) / (4*pi*|x - y|)

is the radiating fundamental solution of Delta + kappa^2 (time convention
exp(-i*omega*t)), and far fields are normalized by

    u_s(x) ~ exp(i*kappa*|x|) / (4*pi*|x|) * Uinf(xhat),

so the far-field kernel attached to a point source at z is exp(-i*kappa*xhat.z).
All functions broadcast over leading axes; points are 3-vectors on the last axis.
"""

from __future__ import annotations

import numpy as np

from .errors import CoincidentPoints, NonUnitDirection

# below this separation the fundamental solution is treated as singular
MIN_SEPARATION = 1e-300
UNIT_TOL = 1e-10


def phi(kappa: float, x, y) -> complex | np.ndarray:
    """Fundamental solution Phi_kappa(x, y) = e^{i kappa |x-y|} / (4 pi |x-y|).

    Args:
        kappa: wavenumber (>= 0; kappa = 0 gives the Laplace kernel).
        x, y: points, arrays broadcastable to shape (..., 3).

    Raises:
        CoincidentPoints: if any |x - y| < 1e-300.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(x - y, axis=-1)
    if np.any(r < MIN_SEPARATION):
        raise CoincidentPoints("fundamental solution evaluated at coincident points")
    val = np.exp(1j * kappa * r) / (4.0 * np.pi * r)
    return val[()] if val.ndim == 0 else val


def plane_wave(kappa: float, theta, x) -> complex | np.ndarray:
    """Incident plane wave U^i(x) = e^{i kappa x.theta}."""
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    val = np.exp(1j * kappa * np.sum(x * theta, axis=-1))
    return val[()] if val.ndim == 0 else val


def farfield_kernel(kappa: float, xhat, z) -> complex | np.ndarray:
    """Far-field phase factor e^{-i kappa xhat.z} for observation direction xhat.

    Raises:
        NonUnitDirection: if any | |xhat| - 1 | > 1e-10.
    """
    xhat = np.asarray(xhat, dtype=float)
    z = np.asarray(z, dtype=float)
    norms = np.linalg.norm(xhat, axis=-1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise NonUnitDirection("observation direction must be unit length")
    val = np.exp(-1j * kappa * np.sum(xhat * z, axis=-1))
    return val[()] if val.ndim == 0 else val


def fibonacci_sphere(n: int) -> np.ndarray:
    """Deterministic quasi-uniform grid of n unit directions (golden spiral)."""
    if n < 1:
        raise ValueError("need at least one direction")
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    golden = np.pi * (3.0 - np.sqrt(5.0))
    az = golden * i
    dirs = np.column_stack([rho * np.cos(az), rho * np.sin(az), z])
    # renormalize so downstream unit checks at 1e-10 hold exactly
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    return dirs
