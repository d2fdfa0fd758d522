"""The local peak function ``f(z, w) = exp(-(-z)^{2/3} - (-w)^{2/3})``.

On the wedge ``W = {Re z < |Im z|} × {Re w < |Im w|}`` the principal
branch gives ``|arg (-z)^{2/3}| < π/2``, so ``|f| < 1`` on ``W`` while
``f(0, 0) = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["peak_function", "in_wedge", "wedge_samples", "PeakReport", "peak_check"]

HALF_OPENING = 3 * math.pi / 4  # |arg(-z)| < 3π/4  <=>  Re z < |Im z|


def _power(z):
    z = np.asarray(z, dtype=complex)
    out = np.zeros_like(z)
    nz = z != 0
    out[nz] = np.exp((2.0 / 3.0) * np.log(-z[nz]))
    return out


def peak_function(z, w):
    """``exp(-(-z)^{2/3} - (-w)^{2/3})``, principal branch, with ``f(0, 0) = 1``."""
    return np.exp(-_power(z) - _power(w))


def in_wedge(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return z.real < np.abs(z.imag)


def wedge_samples(r0: float = 1.0, n_radii: int = 24, n_angles: int = 24) -> np.ndarray:
    """Polar grid of the planar wedge: open angles, radii graded toward 0."""
    radii = r0 * np.geomspace(1e-4, 1.0, n_radii)
    ang = np.linspace(-HALF_OPENING, HALF_OPENING, n_angles + 2)[1:-1]
    return (-(radii[:, None] * np.exp(1j * ang)[None, :])).ravel()


@dataclass
class PeakReport:
    value_at_origin: float
    delta: float
    max_outside: float  # max |f| over samples at distance >= delta
    margin: float  # 1 - max_outside
    interior_max: float  # max |f| over all samples
    samples: int
    far_samples: int  # samples at distance >= delta


def peak_check(delta: float, r0: float = 1.0, samples=None, n_radii: int = 14, n_angles: int = 14) -> PeakReport:
    """Peak behaviour of ``f`` on ``W ∩ ball(0, r0)``.

    ``samples`` is an optional ``(N, 2)`` array of points; by default the
    product of two planar wedge grids is used.
    """
    if samples is None:
        g = wedge_samples(r0, n_radii, n_angles)
        Z, Wg = np.meshgrid(g, g, indexing="ij")
        samples = np.stack([Z.ravel(), Wg.ravel()], axis=1)
    samples = np.asarray(samples, dtype=complex)
    if not (np.all(in_wedge(samples[:, 0])) and np.all(in_wedge(samples[:, 1]))):
        raise ValueError("sample outside the wedge")
    dist = np.linalg.norm(samples, axis=1)
    keep = dist <= r0 * (1 + 1e-12)
    samples, dist = samples[keep], dist[keep]
    mod = np.abs(peak_function(samples[:, 0], samples[:, 1]))
    far = mod[dist >= delta]
    if far.size == 0:
        raise ValueError("no samples at distance >= delta")
    origin = float(abs(peak_function(np.array([0j]), np.array([0j]))[0]))
    mx = float(np.max(far))
    return PeakReport(origin, float(delta), mx, 1.0 - mx, float(np.max(mod)), int(len(samples)), int(far.size))
