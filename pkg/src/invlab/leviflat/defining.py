"""Real defining functions ρ(z, w) on C² with Wirtinger derivatives.

A :class:`DefiningFunction` evaluates ρ, its complex gradient
``(∂ρ/∂z, ∂ρ/∂w)`` and the complex Hessian ``∂²ρ/∂z_j∂z̄_k``.  Derivatives
come from closed forms when available (polynomial tables, catalog
entries) and from central finite differences otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DefiningFunction",
    "DefiningSystem",
    "CATALOG",
    "catalog",
    "polynomial",
    "from_callable",
    "from_json",
]

GRAD_STEP = 1e-5
HESS_STEP = 1e-4


def _point(p) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    if p.shape != (2,):
        raise ValueError("points in C^2 are (z, w) pairs")
    return p


@dataclass(frozen=True)
class DefiningFunction:
    """``func(z, w) -> real``, optionally with ``grad(z, w) -> (ρ_z, ρ_w)``
    and ``hess(z, w) -> 2x2`` matrix ``[[ρ_zz̄, ρ_zw̄], [ρ_wz̄, ρ_ww̄]]``."""

    func: Callable
    grad: Callable | None = None
    hess: Callable | None = None
    name: str = "rho"
    spec: dict | None = field(default=None, compare=False)  # JSON provenance

    @property
    def provenance(self) -> str:
        return "closed_form" if self.grad is not None and self.hess is not None else "finite_difference"

    def __call__(self, z, w):
        return self.func(z, w)

    def value(self, p) -> float:
        p = _point(p)
        return float(self.func(p[0], p[1]))

    # -- derivatives ------------------------------------------------------

    def gradient(self, p) -> np.ndarray:
        p = _point(p)
        if self.grad is not None:
            return np.asarray(self.grad(p[0], p[1]), dtype=complex)
        return self.fd_gradient(p)

    def hessian(self, p) -> np.ndarray:
        p = _point(p)
        if self.hess is not None:
            return np.asarray(self.hess(p[0], p[1]), dtype=complex)
        return self.fd_hessian(p)

    def _real(self, x: np.ndarray) -> float:
        return float(self.func(complex(x[0], x[1]), complex(x[2], x[3])))

    def fd_gradient(self, p) -> np.ndarray:
        """Central differences; ``∂/∂z = (∂_x - i ∂_y)/2``."""
        p = _point(p)
        x = np.array([p[0].real, p[0].imag, p[1].real, p[1].imag])
        g = np.empty(4)
        for k in range(4):
            h = GRAD_STEP * max(1.0, abs(x[k]))
            e = np.zeros(4)
            e[k] = h
            g[k] = (self._real(x + e) - self._real(x - e)) / (2 * h)
        return np.array([(g[0] - 1j * g[1]) / 2, (g[2] - 1j * g[3]) / 2])

    def fd_hessian(self, p) -> np.ndarray:
        """``ρ_{z_j z̄_k} = ¼[(ρ_{x_j x_k} + ρ_{y_j y_k}) + i(ρ_{x_j y_k} - ρ_{y_j x_k})]``."""
        p = _point(p)
        x = np.array([p[0].real, p[0].imag, p[1].real, p[1].imag])
        hs = HESS_STEP * np.maximum(1.0, np.abs(x))
        H = np.empty((4, 4))
        f0 = self._real(x)
        for a in range(4):
            ea = np.zeros(4)
            ea[a] = hs[a]
            H[a, a] = (self._real(x + ea) - 2 * f0 + self._real(x - ea)) / hs[a] ** 2
            for b in range(a + 1, 4):
                eb = np.zeros(4)
                eb[b] = hs[b]
                H[a, b] = H[b, a] = (self._real(x + ea + eb) - self._real(x + ea - eb)
                                     - self._real(x - ea + eb) + self._real(x - ea - eb)) / (4 * hs[a] * hs[b])
        out = np.empty((2, 2), complex)
        for j in range(2):
            for k in range(2):
                xj, yj, xk, yk = 2 * j, 2 * j + 1, 2 * k, 2 * k + 1
                out[j, k] = 0.25 * ((H[xj, xk] + H[yj, yk]) + 1j * (H[xj, yk] - H[yj, xk]))
        return out

    def real_gradient(self, p) -> np.ndarray:
        """Gradient in R⁴ ordered (x_z, y_z, x_w, y_w); equals ``2 conj(∂ρ)``."""
        g = 2 * np.conj(self.gradient(p))
        return np.array([g[0].real, g[0].imag, g[1].real, g[1].imag])

    def cross_check(self, rng: np.random.Generator, n: int = 20, radius: float = 1.0) -> float:
        """Worst relative disagreement between closed-form and finite-difference derivatives."""
        worst = 0.0
        for _ in range(n):
            p = radius * (rng.standard_normal(2) + 1j * rng.standard_normal(2)) / 2
            for exact, approx in ((self.gradient(p), self.fd_gradient(p)),
                                  (self.hessian(p), self.fd_hessian(p))):
                scale = max(1.0, float(np.max(np.abs(exact))))
                worst = max(worst, float(np.max(np.abs(exact - approx))) / scale)
        return worst

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        if self.spec is None:
            raise ValueError("only catalog or polynomial defining functions serialize")
        return dict(self.spec)


@dataclass(frozen=True)
class DefiningSystem:
    functions: tuple[DefiningFunction, ...]
    center: tuple[complex, complex] = (0j, 0j)
    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "center", tuple(complex(c) for c in self.center))
        if not 1 <= len(self.functions) <= 2:
            raise ValueError("systems of one or two functions are supported in C^2")


# ---------------------------------------------------------------------------
# polynomial tables: ρ = Re Σ c · z^a z̄^b w^c w̄^d


def _mono(x, e):
    return x ** e if e > 0 else 1.0


def _dmono(x, e):
    return e * x ** (e - 1) if e > 0 else 0.0


def polynomial(terms: Sequence[Sequence[float]], name: str = "polynomial") -> DefiningFunction:
    """``terms`` rows are ``[re, im, a, b, c, d]`` for ``(re + i im) z^a z̄^b w^c w̄^d``.

    The defining function is the real part of the sum; all derivatives are
    exact.
    """
    if not terms or any(len(t) != 6 for t in terms):
        raise ValueError("polynomial terms are non-empty rows [re, im, a, b, c, d]")
    rows = [(complex(t[0], t[1]), int(t[2]), int(t[3]), int(t[4]), int(t[5])) for t in terms]
    if any(min(r[1:]) < 0 for r in rows):
        raise ValueError("exponents must be non-negative")

    # variable index -> (holomorphic exponent slot, antiholomorphic slot)
    def P(z, w, dh=(), da=()):
        """Derivative of the complex sum P by holomorphic vars ``dh`` and antiholomorphic ``da``."""
        zb, wb = np.conj(z), np.conj(w)
        total = 0.0
        for c, a, b, cw, dw in rows:
            e = [a, cw, b, dw]  # z, w, z̄, w̄
            coef = c
            for v in dh:
                coef = coef * e[v]
                e[v] -= 1
            for v in da:
                coef = coef * e[2 + v]
                e[2 + v] -= 1
            if coef == 0 or min(e) < 0:
                continue
            total = total + coef * _mono(z, e[0]) * _mono(w, e[1]) * _mono(zb, e[2]) * _mono(wb, e[3])
        return total

    def func(z, w):
        return np.real(P(z, w))

    def grad(z, w):
        # ρ = (P + P̄)/2, ∂_j ρ = (∂_j P + conj(∂_{j̄} P))/2
        return np.array([(P(z, w, dh=(j,)) + np.conj(P(z, w, da=(j,)))) / 2 for j in range(2)])

    def hess(z, w):
        H = np.empty((2, 2), complex)
        for j in range(2):
            for k in range(2):
                H[j, k] = (P(z, w, dh=(j,), da=(k,)) + np.conj(P(z, w, dh=(k,), da=(j,)))) / 2
        return H

    spec = {"polynomial": [[r[0].real, r[0].imag, *r[1:]] for r in rows]}
    return DefiningFunction(func, grad, hess, name=name, spec=spec)


def from_callable(func: Callable, name: str = "callable") -> DefiningFunction:
    """Evaluator-only defining function; derivatives by finite differences."""
    return DefiningFunction(func, name=name)


def _re_w_exp_im_z() -> DefiningFunction:
    # ρ = Re(w E), E = exp(-i Im z) = exp(-(z - z̄)/2)
    def E(z):
        return np.exp(-1j * np.imag(z))

    def func(z, w):
        return np.real(w * E(z))

    def grad(z, w):
        e = E(z)
        return np.array([(-w * e + np.conj(w) * np.conj(e)) / 4, e / 2])

    def hess(z, w):
        e = E(z)
        rho = np.real(w * e)
        return np.array([[-rho / 4, np.conj(e) / 4], [e / 4, 0.0]])

    return DefiningFunction(func, grad, hess, name="re_w_exp_im_z", spec={"catalog": "re_w_exp_im_z"})


_TABLES = {
    "re_w": ([[1, 0, 0, 0, 1, 0]], "Re w"),
    "re_z": ([[1, 0, 1, 0, 0, 0]], "Re z"),
    "re_w_minus_z2": ([[1, 0, 0, 0, 1, 0], [-1, 0, 2, 0, 0, 0]], "Re(w - z^2)"),
    "sphere": ([[1, 0, 1, 1, 0, 0], [1, 0, 0, 0, 1, 1], [-1, 0, 0, 0, 0, 0]], "|z|^2 + |w|^2 - 1"),
    "re_w_plus_01_abs_z2": ([[1, 0, 0, 0, 1, 0], [0.1, 0, 1, 1, 0, 0]], "Re w + 0.1|z|^2"),
    "im_w_minus_abs_z2_plus_1": ([[0, -1, 0, 0, 1, 0], [-1, 0, 1, 1, 0, 0], [1, 0, 0, 0, 0, 0]],
                                 "Im w - |z|^2 + 1"),
}

CATALOG: dict[str, str] = {k: v[1] for k, v in _TABLES.items()}
CATALOG["re_w_exp_im_z"] = "Re(w exp(-i Im z))"


def catalog(name: str) -> DefiningFunction:
    if name == "re_w_exp_im_z":
        return _re_w_exp_im_z()
    if name not in _TABLES:
        raise KeyError(f"unknown defining function {name!r}; known: {sorted(CATALOG)}")
    df = polynomial(_TABLES[name][0], name=name)
    return DefiningFunction(df.func, df.grad, df.hess, name=name, spec={"catalog": name})


def from_json(data: dict) -> DefiningFunction:
    if "catalog" in data:
        return catalog(data["catalog"])
    if "polynomial" in data:
        return polynomial(data["polynomial"], name=data.get("name", "polynomial"))
    raise ValueError("defining function JSON needs a 'catalog' or 'polynomial' key")
