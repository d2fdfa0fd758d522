"""Boundary-normal normalization along a complex disc in a Levi-flat hypersurface.

Given ``r(z, w)`` with ``r(z, 0) = 0`` on the unit disc, the phase
``v(z) = arg ∂r/∂w(z, 0)`` is harmonic.  With ``u`` its harmonic conjugate
(``u(0) = 0``) and ``h = exp(-u + iv)``, the coordinates ``z' = z``,
``w' = w·h(z)`` make ``arg ∂r̃/∂w'(z', 0)`` constant.

The conjugate is computed per circle from Fourier coefficients (mode ``n``
rotated by ``-i·sign(n)``), and ``v + iu`` is continued as a power series
so ``h`` can be evaluated anywhere in the disc.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .defining import DefiningFunction

__all__ = ["HarmonicityError", "NormalizationResult", "df_normalize"]


class HarmonicityError(ValueError):
    """The phase ``v`` is not harmonic: the input violates the pseudoconvex Levi-flat hypothesis."""


@dataclass
class NormalizationResult:
    z: np.ndarray  # (n_circles + 1, n_angles) grid, row 0 is the center
    v: np.ndarray
    u: np.ndarray
    h: np.ndarray
    series: np.ndarray  # power-series coefficients of v + iu
    transformed: DefiningFunction
    spread: float
    harmonic_residual: float

    def h_at(self, z):
        return np.exp(1j * np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.series))


def _spread(phases: np.ndarray) -> float:
    """Angular spread of unit-modulus data (robust to the ±π seam)."""
    ref = phases.ravel()[0]
    d = np.angle(np.exp(1j * (phases - ref)))
    return float(np.max(d) - np.min(d))


def df_normalize(r: DefiningFunction, radius: float = 0.9, n_circles: int = 8, n_angles: int = 64,
                 harmonic_tol: float = 1e-6, vanish_tol: float = 1e-10) -> NormalizationResult:
    """Normalize ``r`` along ``{w = 0}`` on the disc of the given radius."""
    radii = radius * np.arange(1, n_circles + 1) / n_circles
    t = 2 * np.pi * np.arange(n_angles) / n_angles
    Z = np.vstack([np.zeros(n_angles, complex), radii[:, None] * np.exp(1j * t)[None, :]])
    vals = np.array([[r.value((z, 0j)) for z in row] for row in Z])
    if np.max(np.abs(vals)) >= vanish_tol:
        raise ValueError("r(z, 0) does not vanish on the disc")
    rw = np.array([[r.gradient((z, 0j))[1] for z in row] for row in Z])
    if np.min(np.abs(rw)) == 0:
        raise ValueError("dr/dw vanishes on the disc")
    v = np.angle(rw)
    # per-circle Fourier data; unwrap along each circle so the phase is continuous
    v0 = float(v[0, 0])
    v_circ = np.unwrap(v[1:], axis=1)
    v_circ -= 2 * np.pi * np.round((v_circ[:, :1] - v0) / (2 * np.pi))
    coef = np.fft.fft(v_circ, axis=1) / n_angles
    n = np.fft.fftfreq(n_angles, d=1.0 / n_angles)
    # harmonicity: mean value property plus radial consistency with the outer circle
    outer = coef[-1]
    scale = (radii[:, None] / radii[-1]) ** np.abs(n)[None, :]
    pred = np.real(np.fft.ifft(outer[None, :] * scale * n_angles, axis=1))
    resid = max(float(np.max(np.abs(coef[:, 0].real - v0))), float(np.max(np.abs(pred - v_circ))))
    if resid > harmonic_tol:
        raise HarmonicityError(f"phase is not harmonic (residual {resid:.3e})")
    u_coef = -1j * np.sign(n) * coef
    u_coef[:, 0] = 0.0
    u = np.vstack([np.zeros(n_angles), np.real(np.fft.ifft(u_coef * n_angles, axis=1))])
    v_full = np.vstack([np.full(n_angles, v0), v_circ])
    h = np.exp(-u + 1j * v_full)
    # v + iu = Σ c_k z^k with c_0 = v(0), c_k = 2 a_k / R^k from the outer circle
    kmax = n_angles // 2 - 1
    series = np.zeros(kmax + 1, complex)
    series[0] = v0
    series[1:] = 2 * outer[1:kmax + 1] / radii[-1] ** np.arange(1, kmax + 1)

    def hz(z):
        return np.exp(1j * np.polynomial.polynomial.polyval(z, series))

    dseries = np.polynomial.polynomial.polyder(series)

    def func(z, w):
        return r.func(z, w / hz(z))

    def grad(z, w):
        hh = hz(z)
        dh = 1j * np.polynomial.polynomial.polyval(z, dseries) * hh
        gz, gw = r.gradient((z, w / hh))
        return np.array([gz - gw * w * dh / hh ** 2, gw / hh])

    transformed = DefiningFunction(func, grad, None, name=f"{r.name}~normalized")
    phases = np.array([[np.angle(transformed.gradient((z, 0j))[1]) for z in row] for row in Z])
    return NormalizationResult(Z, v_full, u, h, series, transformed, _spread(phases), resid)
