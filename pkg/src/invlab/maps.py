"""Holomorphic maps between model product domains.

A :class:`HoloMap` is a vectorized evaluator plus a Jacobian.  Polynomial
maps carry their coefficient arrays; transcendental ones (Möbius maps,
charts, coverings) are built from closures.  Image containment is never
assumed: :meth:`HoloMap.feasibility_margin` samples the source and reports
the worst target margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .metrics import ProductDomain, Tangent
from .planar import (
    Mobius,
    PlanarDomain,
    annulus_covering,
    cayley_to_disc,
    chart_for,
)

__all__ = ["HoloMap", "bidisc_automorphism", "feasible_maps", "MAP_FAMILIES"]


@dataclass(frozen=True)
class HoloMap:
    source: ProductDomain
    target: ProductDomain
    func: Callable  # (n, ...) complex -> (m, ...) complex
    jac: Callable   # (n,) complex -> (m, n) complex
    coeffs: tuple | None = None
    name: str = ""
    inverse: HoloMap | None = field(default=None, compare=False, repr=False)

    def __call__(self, p):
        return np.asarray(self.func(np.asarray(p, dtype=complex)), dtype=complex)

    def jacobian(self, p) -> np.ndarray:
        return np.atleast_2d(np.asarray(self.jac(np.asarray(p, dtype=complex)), dtype=complex))

    def feasibility_margin(self, n: int = 2000, rng: np.random.Generator | None = None) -> float:
        """Minimum target margin over ``n`` random source points."""
        rng = rng or np.random.default_rng(0)
        pts = np.array([f.sample_interior(n, rng) for f in self.source.factors])
        img = self(pts)
        return float(min(np.min(f.margin(img[k])) for k, f in enumerate(self.target.factors)))

    @classmethod
    def polynomial(cls, coeffs, source: ProductDomain, target: ProductDomain, name: str = "poly"):
        """Polynomial map; ``coeffs[i][a]`` (n=1) or ``coeffs[i][a, b]`` (n=2)."""
        cs = tuple(np.asarray(c, dtype=complex) for c in coeffs)
        n = source.dim
        if any(c.ndim != n for c in cs) or len(cs) != target.dim:
            raise ValueError("coefficient arrays do not match the dimensions")
        if n == 1:
            def func(p):
                return np.stack([np.polynomial.polynomial.polyval(p[0], c) for c in cs])

            def jac(p):
                return np.array([[np.polynomial.polynomial.polyval(p[0], np.polynomial.polynomial.polyder(c))]
                                 for c in cs])
        else:
            def func(p):
                return np.stack([np.polynomial.polynomial.polyval2d(p[0], p[1], c) for c in cs])

            def jac(p):
                rows = []
                for c in cs:
                    d1 = np.polynomial.polynomial.polyder(c, axis=0)
                    d2 = np.polynomial.polynomial.polyder(c, axis=1)
                    rows.append([np.polynomial.polynomial.polyval2d(p[0], p[1], d1),
                                 np.polynomial.polynomial.polyval2d(p[0], p[1], d2)])
                return np.array(rows)
        return cls(source, target, func, jac, coeffs=cs, name=name)

    @classmethod
    def diagonal(cls, parts, source: ProductDomain, target: ProductDomain, name: str = "diag"):
        """Product map from per-factor ``(f, df)`` pairs."""
        parts = tuple(parts)

        def func(p):
            return np.stack([f(p[k]) for k, (f, _) in enumerate(parts)])

        def jac(p):
            return np.diag([complex(df(p[k])) for k, (_, df) in enumerate(parts)])

        return cls(source, target, func, jac, name=name)


def bidisc_automorphism(a1: complex, a2: complex, phases=(1.0, 1.0)) -> HoloMap:
    """Component-wise Möbius automorphism of the bidisc; ``g(0) = (e1 a1, e2 a2)``."""
    if not (abs(a1) < 1 and abs(a2) < 1):
        raise ValueError("Möbius parameters must lie in the open unit disc")
    m1, m2 = Mobius(complex(a1), complex(phases[0])), Mobius(complex(a2), complex(phases[1]))
    bi = ProductDomain.polydisc(2)
    inv1, inv2 = m1.inverse(), m2.inverse()
    inv = HoloMap.diagonal([(inv1, inv1.derivative), (inv2, inv2.derivative)], bi, bi, name="bidisc_aut_inv")
    g = HoloMap.diagonal([(m1, m1.derivative), (m2, m2.derivative)], bi, bi, name="bidisc_aut")
    return HoloMap(g.source, g.target, g.func, g.jac, name=g.name, inverse=inv)


# ---------------------------------------------------------------------------
# feasible map generator


def _rand_c(rng, scale=1.0):
    return scale * complex(rng.standard_normal(), rng.standard_normal())


def _rand_disc_point(rng, rmax=0.95):
    return rmax * math.sqrt(rng.random()) * complex(np.exp(2j * np.pi * rng.random()))


def _disc_poly(rng):
    """Coefficients with ``sum |c_k| < 1``: maps the disc into itself."""
    deg = int(rng.integers(1, 5))
    c = np.array([_rand_c(rng) for _ in range(deg + 1)])
    return c * (0.98 * rng.random() + 0.01) / np.sum(np.abs(c))


def _poly_pair(c):
    dc = np.polynomial.polynomial.polyder(c)
    return (lambda z: np.polynomial.polynomial.polyval(z, c),
            lambda z: np.polynomial.polynomial.polyval(z, dc))


def _riemann_to_disc(domain: PlanarDomain):
    """Map of a simply connected model domain onto the unit disc."""
    ch = chart_for(domain)
    if ch.target.kind == "upper_half_plane":
        ch = ch.then(cayley_to_disc())
    return ch


def _random_cone(rng) -> PlanarDomain:
    return PlanarDomain.truncated_cone(rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0))


def _one(domain):
    return ProductDomain.of(domain)


D = PlanarDomain.unit_disc()


def fam_disc_poly(rng):
    f, df = _poly_pair(_disc_poly(rng))
    return HoloMap.diagonal([(f, df)], _one(D), _one(D), "disc_poly")


def fam_disc_mobius(rng):
    m = Mobius(_rand_disc_point(rng), complex(np.exp(2j * np.pi * rng.random())))
    return HoloMap.diagonal([(m, m.derivative)], _one(D), _one(D), "disc_mobius")


def fam_blaschke(rng):
    m = Mobius(_rand_disc_point(rng))
    return HoloMap.diagonal([(lambda z: z * m(z), lambda z: m(z) + z * m.derivative(z))],
                            _one(D), _one(D), "blaschke2")


def fam_cone_to_disc(rng):
    cone = _random_cone(rng)
    ch = _riemann_to_disc(cone)
    f, df = _poly_pair(_disc_poly(rng))
    return HoloMap.diagonal([(lambda z: f(ch(z)), lambda z: df(ch(z)) * ch.derivative(z))],
                            _one(cone), _one(D), "cone_to_disc")


def fam_disc_to_cone(rng):
    cone = _random_cone(rng)
    ch = _riemann_to_disc(cone)
    m = Mobius(_rand_disc_point(rng, 0.8), complex(np.exp(2j * np.pi * rng.random())))
    s = rng.uniform(0.3, 1.0)

    def f(z):
        return ch.inverse(s * m(z))

    def df(z):
        w = s * m(z)
        return s * m.derivative(z) / ch.derivative(ch.inverse(w))

    return HoloMap.diagonal([(f, df)], _one(D), _one(cone), "disc_to_cone")


def fam_cone_inclusion(rng):
    t1, e1 = rng.uniform(0.2, 2.5), rng.uniform(0.2, 2.0)
    t2, e2 = rng.uniform(t1, math.pi * 0.999), rng.uniform(e1, 3.0)
    src, dst = PlanarDomain.truncated_cone(t1, e1), PlanarDomain.truncated_cone(t2, e2)
    return HoloMap.diagonal([(lambda z: z, lambda z: np.ones_like(z))], _one(src), _one(dst), "cone_inclusion")


def fam_cone_dilation(rng):
    cone = _random_cone(rng)
    s = rng.uniform(0.1, 1.0)
    return HoloMap.diagonal([(lambda z: s * z, lambda z: s * np.ones_like(z))], _one(cone), _one(cone), "cone_dilation")


def fam_subdisc(rng):
    a = _rand_disc_point(rng, 0.6)
    r = rng.uniform(0.05, 1 - abs(a))
    src = PlanarDomain.disc(a, r)
    return HoloMap.diagonal([(lambda z: z, lambda z: np.ones_like(z))], _one(src), _one(D), "subdisc")


def fam_uhp_to_disc(rng):
    c = cayley_to_disc()
    f, df = _poly_pair(_disc_poly(rng))
    H = PlanarDomain.upper_half_plane()
    return HoloMap.diagonal([(lambda w: f(c(w)), lambda w: df(c(w)) * c.derivative(w))],
                            _one(H), _one(D), "uhp_to_disc")


def fam_annulus_self(rng):
    r1 = rng.uniform(0.2, 1.0)
    r2 = r1 * rng.uniform(1.5, 6.0)
    A = PlanarDomain.annulus(r1, r2)
    e = complex(np.exp(2j * np.pi * rng.random()))
    if rng.random() < 0.5:
        pair = (lambda z: e * z, lambda z: e * np.ones_like(z))
    else:
        pair = (lambda z: e * r1 * r2 / z, lambda z: -e * r1 * r2 / z ** 2)
    return HoloMap.diagonal([pair], _one(A), _one(A), "annulus_aut")


def fam_annulus_inclusion(rng):
    r1 = rng.uniform(0.2, 1.0)
    r2 = r1 * rng.uniform(1.5, 6.0)
    s1, s2 = r1 * rng.uniform(0.3, 1.0), r2 * rng.uniform(1.0, 2.0)
    src, dst = PlanarDomain.annulus(r1, r2), PlanarDomain.annulus(s1, s2)
    return HoloMap.diagonal([(lambda z: z, lambda z: np.ones_like(z))], _one(src), _one(dst), "annulus_inclusion")


def fam_annulus_to_disc(rng):
    r1 = rng.uniform(0.2, 1.0)
    r2 = r1 * rng.uniform(1.5, 6.0)
    A = PlanarDomain.annulus(r1, r2)
    e = complex(np.exp(2j * np.pi * rng.random()))
    return HoloMap.diagonal([(lambda z: e * z / r2, lambda z: e * np.ones_like(z) / r2)],
                            _one(A), _one(D), "annulus_to_disc")


def fam_disc_covers_annulus(rng):
    r1 = rng.uniform(0.2, 1.0)
    r2 = r1 * rng.uniform(1.5, 6.0)
    cov = annulus_covering(r1, r2)
    up = cayley_to_disc()
    m = Mobius(_rand_disc_point(rng, 0.8), complex(np.exp(2j * np.pi * rng.random())))

    def f(z):
        return cov(up.inverse(m(z)))

    def df(z):
        s = m(z)
        w = up.inverse(s)
        return cov.derivative(w) * m.derivative(z) / up.derivative(w)

    return HoloMap.diagonal([(f, df)], _one(D), _one(cov.domain), "disc_covers_annulus")


B = ProductDomain.polydisc(2)


def fam_bidisc_aut(rng):
    ph = [complex(np.exp(2j * np.pi * rng.random())) for _ in range(2)]
    return bidisc_automorphism(_rand_disc_point(rng), _rand_disc_point(rng), ph)


def fam_bidisc_diag_poly(rng):
    return HoloMap.diagonal([_poly_pair(_disc_poly(rng)), _poly_pair(_disc_poly(rng))], B, B, "bidisc_diag_poly")


def fam_bidisc_mixing(rng):
    """Non-diagonal self-maps of the bidisc: ``(z1 z2, z2)`` or averages."""
    if rng.random() < 0.5:
        c1 = np.zeros((2, 2), complex)
        c1[1, 1] = complex(np.exp(2j * np.pi * rng.random()))
        c2 = np.zeros((2, 2), complex)
        c2[0, 1] = 1.0
    else:
        s, t = rng.random(2)
        c1 = np.zeros((2, 2), complex)
        c1[1, 0], c1[0, 1] = 0.5 * s, 0.5 * (1 - s)
        c2 = np.zeros((2, 2), complex)
        c2[1, 0], c2[0, 1] = t * 0.99, (1 - t) * 0.99
    return HoloMap.polynomial([c1, c2], B, B, "bidisc_mixing")


def fam_disc_cone_to_bidisc(rng):
    cone = _random_cone(rng)
    ch = _riemann_to_disc(cone)
    f, df = _poly_pair(_disc_poly(rng))
    src = ProductDomain.of(D, cone)
    return HoloMap.diagonal([(f, df), (ch, ch.derivative)], src, B, "disc_cone_to_bidisc")


def fam_cone_product_inclusion(rng):
    c1, c2 = _random_cone(rng), _random_cone(rng)
    d1 = PlanarDomain.truncated_cone(rng.uniform(c1.theta, math.pi * 0.999), c1.eps * rng.uniform(1, 2))
    d2 = PlanarDomain.truncated_cone(rng.uniform(c2.theta, math.pi * 0.999), c2.eps * rng.uniform(1, 2))
    ident = (lambda z: z, lambda z: np.ones_like(z))
    return HoloMap.diagonal([ident, ident], ProductDomain.of(c1, c2), ProductDomain.of(d1, d2), "cone_product_inclusion")


MAP_FAMILIES = {
    "disc_poly": fam_disc_poly,
    "disc_mobius": fam_disc_mobius,
    "blaschke2": fam_blaschke,
    "cone_to_disc": fam_cone_to_disc,
    "disc_to_cone": fam_disc_to_cone,
    "cone_inclusion": fam_cone_inclusion,
    "cone_dilation": fam_cone_dilation,
    "subdisc": fam_subdisc,
    "uhp_to_disc": fam_uhp_to_disc,
    "annulus_aut": fam_annulus_self,
    "annulus_inclusion": fam_annulus_inclusion,
    "annulus_to_disc": fam_annulus_to_disc,
    "disc_covers_annulus": fam_disc_covers_annulus,
    "bidisc_aut": fam_bidisc_aut,
    "bidisc_diag_poly": fam_bidisc_diag_poly,
    "bidisc_mixing": fam_bidisc_mixing,
    "disc_cone_to_bidisc": fam_disc_cone_to_bidisc,
    "cone_product_inclusion": fam_cone_product_inclusion,
}


def random_tangent(domain: ProductDomain, rng: np.random.Generator) -> Tangent:
    p = tuple(complex(f.sample_interior(1, rng)[0]) for f in domain.factors)
    v = tuple(_rand_c(rng) for _ in domain.factors)
    return Tangent(p, v)


def feasible_maps(count: int, seed: int = 0) -> Iterator[tuple[HoloMap, Tangent]]:
    """Deterministic stream of ``(map, tangent)`` pairs cycling over the families."""
    rng = np.random.default_rng(seed)
    names = list(MAP_FAMILIES)
    for i in range(count):
        fmap = MAP_FAMILIES[names[i % len(names)]](rng)
        yield fmap, random_tangent(fmap.source, rng)
