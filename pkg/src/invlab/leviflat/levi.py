"""Levi form, Levi-flatness and genericity tests for hypersurfaces in C²."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .defining import DefiningFunction, DefiningSystem

__all__ = [
    "LeviValue",
    "complex_tangent",
    "levi_form",
    "project_to_surface",
    "project_to_intersection",
    "SurfaceSampler",
    "FlatnessVerdict",
    "is_levi_flat",
    "StratumReport",
    "genericity_check",
]

ON_SURFACE = 1e-10
TANGENT_TOL = 1e-10
ZERO_TOL = 1e-8


class LeviValue(NamedTuple):
    value: float
    sign: str  # negative | zero | positive


def _classify(x: float) -> str:
    if abs(x) < ZERO_TOL:
        return "zero"
    return "positive" if x > 0 else "negative"


def complex_tangent(rho: DefiningFunction, p) -> np.ndarray:
    """Unit vector spanning the complex tangent line ``Σ ρ_{z_j} X_j = 0``."""
    g = rho.gradient(p)
    X = np.array([g[1], -g[0]])
    n = np.linalg.norm(X)
    if n == 0:
        raise ValueError("critical point of the defining function")
    return X / n


def levi_form(rho: DefiningFunction, p, X=None, normalize: bool = False) -> LeviValue:
    """``Σ ρ_{z_j z̄_k}(p) X_j X̄_k`` for a complex tangent ``X``.

    ``X`` defaults to the unit complex tangent.  With ``normalize`` the
    value is divided by ``|∂ρ(p)|``, which makes it independent of positive
    rescalings of ρ.
    """
    p = np.asarray(p, dtype=complex)
    if abs(rho.value(p)) >= ON_SURFACE:
        raise ValueError(f"point is off the hypersurface (|rho| = {abs(rho.value(p)):.3e})")
    g = rho.gradient(p)
    if X is None:
        X = complex_tangent(rho, p)
    X = np.asarray(X, dtype=complex)
    if abs(g @ X) >= TANGENT_TOL:
        raise ValueError("vector is not complex tangent")
    H = rho.hessian(p)
    val = float(np.real(X @ H @ np.conj(X)))
    if normalize:
        val /= float(np.linalg.norm(g))
    return LeviValue(val, _classify(val))


def project_to_surface(rho: DefiningFunction, p, tol: float = 1e-13, maxiter: int = 50) -> np.ndarray:
    """Newton iteration along the real gradient onto ``{ρ = 0}``."""
    p = np.asarray(p, dtype=complex).copy()
    for _ in range(maxiter):
        r = rho.value(p)
        if abs(r) < tol:
            return p
        G = 2 * np.conj(rho.gradient(p))
        nrm = float(np.sum(np.abs(G) ** 2))
        if nrm == 0:
            break
        p = p - r * G / nrm
    if abs(rho.value(p)) < ON_SURFACE:
        return p
    raise RuntimeError("projection onto the hypersurface did not converge")


def project_to_intersection(funcs, p, tol: float = 1e-13, maxiter: int = 60) -> np.ndarray:
    """Gauss–Newton (minimum-norm steps) onto ``{ρ₁ = ρ₂ = 0}``."""
    p = np.asarray(p, dtype=complex).copy()
    for _ in range(maxiter):
        r = np.array([f.value(p) for f in funcs])
        if np.max(np.abs(r)) < tol:
            return p
        J = np.array([f.real_gradient(p) for f in funcs])
        dx = np.linalg.lstsq(J, -r, rcond=None)[0]
        p = p + np.array([dx[0] + 1j * dx[1], dx[2] + 1j * dx[3]])
    if max(abs(f.value(p)) for f in funcs) < ON_SURFACE:
        return p
    raise RuntimeError("projection onto the intersection did not converge")


@dataclass(frozen=True)
class SurfaceSampler:
    """Random starts in a polydisc box, projected onto the surface.

    The box center is always the first start, so symmetric features at the
    center are sampled deterministically.
    """

    center: tuple = (0j, 0j)
    radius: float = 1.0
    n: int = 200
    seed: int = 0

    def starts(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        c = np.asarray(self.center, dtype=complex)
        r = self.radius * np.sqrt(rng.random((self.n - 1, 2)))
        t = 2 * np.pi * rng.random((self.n - 1, 2))
        return np.vstack([c[None, :], c + r * np.exp(1j * t)])

    def sample(self, funcs) -> np.ndarray:
        funcs = list(funcs) if isinstance(funcs, (list, tuple)) else [funcs]
        out = []
        for p in self.starts():
            try:
                q = project_to_surface(funcs[0], p) if len(funcs) == 1 else project_to_intersection(funcs, p)
            except (RuntimeError, np.linalg.LinAlgError):
                continue
            out.append(q)
        if not out:
            raise RuntimeError("sampler failed to land on the surface")
        return np.array(out)


@dataclass
class FlatnessVerdict:
    flat: bool
    max_abs: float
    witness: np.ndarray
    witness_value: float
    samples: int


def is_levi_flat(rho: DefiningFunction, sampler: SurfaceSampler = SurfaceSampler(), tol: float = 1e-8) -> FlatnessVerdict:
    """Levi-flat iff the Levi form vanishes (to ``tol``) at every sample."""
    pts = sampler.sample(rho)
    vals = np.array([levi_form(rho, p).value for p in pts])
    k = int(np.argmax(np.abs(vals)))
    worst = float(abs(vals[k]))
    return FlatnessVerdict(worst < tol, worst, pts[k], float(vals[k]), len(pts))


@dataclass
class StratumReport:
    stratum: tuple[int, ...]
    samples: int
    min_real_wedge: float
    min_complex_wedge: float
    generic: bool
    witness: np.ndarray


def _wedges(funcs, p) -> tuple[float, float]:
    if len(funcs) == 1:
        return float(np.linalg.norm(funcs[0].real_gradient(p))), float(np.linalg.norm(funcs[0].gradient(p)))
    g1, g2 = (f.real_gradient(p) for f in funcs)
    real = float(np.sqrt(max(np.dot(g1, g1) * np.dot(g2, g2) - np.dot(g1, g2) ** 2, 0.0)))
    a, b = (f.gradient(p) for f in funcs)
    cplx = float(abs(a[0] * b[1] - a[1] * b[0]))
    return real, cplx


def genericity_check(system: DefiningSystem, sampler: SurfaceSampler | None = None, tol: float = 1e-8) -> list[StratumReport]:
    """Minimum real and complex wedge magnitudes on each stratum.

    Strata are the single hypersurfaces and, for two functions, their
    intersection.  A stratum is generic iff both minima exceed ``tol``.
    """
    sampler = sampler or SurfaceSampler(system.center, system.radius)
    n = len(system.functions)
    strata = [(k,) for k in range(n)] + ([(0, 1)] if n == 2 else [])
    out = []
    for s in strata:
        funcs = [system.functions[k] for k in s]
        pts = sampler.sample(funcs)
        if len(pts) == 0:
            raise RuntimeError(f"empty sample on stratum {s}")
        w = np.array([_wedges(funcs, p) for p in pts])
        k = int(np.argmin(np.minimum(w[:, 0], w[:, 1])))
        mr, mc = float(w[:, 0].min()), float(w[:, 1].min())
        out.append(StratumReport(s, len(pts), mr, mc, mr > tol and mc > tol, pts[k]))
    return out
