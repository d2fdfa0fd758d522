"""Numerical leaves of Levi-flat hypersurfaces as graphs ``w = φ(ζ)``.

A complex curve inside ``{ρ = 0}`` written as a graph over the z-axis
satisfies ``dw/dζ = -ρ_z/ρ_w``.  ``trace_leaf`` integrates this along a
path in the ζ-plane with classical RK4, projecting back onto the surface
after every step.  On a Levi-flat surface a closed path returns to its
starting value; otherwise the loop defect measures the failure of the
graph equation to be integrable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .defining import DefiningFunction

__all__ = ["LeafPath", "LeafTrace", "trace_leaf"]


@dataclass(frozen=True)
class LeafPath:
    """Polyline through ``vertices`` or the circle ``|ζ - center| = radius``
    (positively oriented, starting at ``center + radius``)."""

    kind: str
    vertices: tuple = ()
    center: complex = 0j
    radius: float = 1.0

    @classmethod
    def polyline(cls, vertices) -> LeafPath:
        v = tuple(complex(x) for x in vertices)
        if len(v) < 2:
            raise ValueError("a polyline needs at least two vertices")
        return cls("polyline", v)

    @classmethod
    def circle(cls, center: complex = 0j, radius: float = 1.0) -> LeafPath:
        if radius <= 0:
            raise ValueError("radius must be positive")
        return cls("circle", center=complex(center), radius=float(radius))

    @property
    def closed(self) -> bool:
        return self.kind == "circle" or (len(self.vertices) > 2 and self.vertices[0] == self.vertices[-1])

    @property
    def start(self) -> complex:
        return self.vertices[0] if self.kind == "polyline" else self.center + self.radius

    def pieces(self, steps: int):
        """Yield ``(zeta(s), dzeta/ds, s0, s1, n)`` for each smooth piece."""
        if self.kind == "circle":
            c, R = self.center, self.radius
            yield (lambda s: c + R * np.exp(1j * s)), (lambda s: 1j * R * np.exp(1j * s)), 0.0, 2 * np.pi, steps
            return
        for a, b in zip(self.vertices[:-1], self.vertices[1:]):
            yield (lambda s, a=a, b=b: a + s * (b - a)), (lambda s, a=a, b=b: b - a), 0.0, 1.0, steps


@dataclass
class LeafTrace:
    zeta: np.ndarray
    w: np.ndarray
    residuals: np.ndarray
    closed: bool
    loop_defect: float | None
    failed: bool
    tol: float

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["re_zeta", "im_zeta", "re_w", "im_w", "residual"])
            for z, w, r in zip(self.zeta, self.w, self.residuals):
                out.writerow([f"{x:.15g}" for x in (z.real, z.imag, w.real, w.imag, r)])


def _slope(rho: DefiningFunction, z: complex, w: complex, floor: float) -> complex:
    gz, gw = rho.gradient((z, w))
    if abs(gw) < floor:
        raise ValueError(f"graph condition violated: |d rho/dw| = {abs(gw):.3e} at z = {z:.6g}")
    return -gz / gw


def _project(rho: DefiningFunction, z: complex, w: complex, iters: int = 4) -> complex:
    # move w along conj(ρ_w): the first-order change of ρ is then real and exact
    for _ in range(iters):
        r = rho.value((z, w))
        if abs(r) < 1e-15:
            break
        gw = rho.gradient((z, w))[1]
        w = w - r * np.conj(gw) / (2 * abs(gw) ** 2)
    return w


def trace_leaf(rho: DefiningFunction, start, path: LeafPath, steps: int = 400,
               tol: float = 1e-8, graph_floor: float = 1e-12) -> LeafTrace:
    """Integrate ``dw/dζ = -ρ_z/ρ_w`` along ``path`` from ``start = (ζ₀, w₀)``.

    ``steps`` is the number of RK4 steps per smooth piece.  The trace is
    marked failed when the residual ``|ρ|`` exceeds ``tol`` anywhere.
    """
    z0, w = complex(start[0]), complex(start[1])
    if abs(rho.value((z0, w))) >= 1e-10:
        raise ValueError("start point is not on the hypersurface")
    if abs(z0 - path.start) > 1e-12:
        raise ValueError("start point must lie over the path's initial point")
    zs, ws = [z0], [w]
    for zeta, dzeta, s0, s1, n in path.pieces(steps):
        h = (s1 - s0) / n

        def F(s, w):
            return _slope(rho, complex(zeta(s)), w, graph_floor) * complex(dzeta(s))

        for i in range(n):
            s = s0 + i * h
            k1 = F(s, w)
            k2 = F(s + h / 2, w + h / 2 * k1)
            k3 = F(s + h / 2, w + h / 2 * k2)
            k4 = F(s + h, w + h * k3)
            w = w + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            z = complex(zeta(s + h))
            w = _project(rho, z, w)
            if not np.isfinite(w):
                raise ValueError("residual blow-up during integration")
            zs.append(z)
            ws.append(w)
    zs, ws = np.array(zs), np.array(ws)
    res = np.array([abs(rho.value((z, w))) for z, w in zip(zs, ws)])
    defect = float(abs(ws[-1] - ws[0])) if path.closed else None
    return LeafTrace(zs, ws, res, path.closed, defect, bool(np.max(res) >= tol), tol)
