"""Brute-force bounds for the three extremal problems by polynomial search.

* ``kobayashi_upper_oracle``   -- discs ``f: Δ -> D``, ``f(0) = z``: upper bound on F^K.
* ``eisenman_upper_oracle``    -- maps ``Δ^n -> D``, ``f(0) = z``: upper bound on M^E.
* ``caratheodory_lower_oracle``-- maps ``D -> Δ^n``, ``f(z) = 0``: lower bound on M^C.

Candidates are diagonal (one polynomial per factor), which is enough for
valid bounds on products.  Centering constraints are built into the
parameterization.  Each restart is an independent degree ladder
``1, 2, ..., d`` warm-started level to level; restarts are merged by
best bound, so more degree or more restarts can only improve the result.

On circle boundaries the maximum of ``|p|`` is located exactly: by
Bernstein's inequality for ``|p|^2`` every global maximizer sits next to a
sample within ``2 d^2 (pi/M)^2`` of the sampled maximum, and those brackets
are refined.  Bounds on discs and annuli are therefore certified rather
than merely sampled; cone boundaries rely on a dense graded sample.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .metrics import ProductDomain, Tangent
from .planar import PlanarDomain

__all__ = [
    "OptimizerConfig",
    "DiscCandidate",
    "OracleResult",
    "kobayashi_upper_oracle",
    "eisenman_upper_oracle",
    "caratheodory_lower_oracle",
    "feasibility_margin",
    "append_ledger",
]

FINE = 8192  # samples for shrink/certification on circles


@dataclass(frozen=True)
class OptimizerConfig:
    degree: int = 6
    restarts: int = 8
    grid: int = 96
    radial: int = 8
    penalties: tuple[float, ...] = (1e2, 1e4, 1e6)
    seed: int = 0
    max_evals: int = 70  # per free parameter per local search
    step: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "penalties", tuple(float(p) for p in self.penalties))
        ints = (self.degree, self.restarts, self.grid, self.radial, self.max_evals)
        if min(ints) <= 0 or self.step <= 0 or not self.penalties or min(self.penalties) <= 0:
            raise ValueError("optimizer settings must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @classmethod
    def from_json(cls, data: dict) -> OptimizerConfig:
        return cls(**data)

    def to_json(self) -> dict:
        d = asdict(self)
        d["penalties"] = list(self.penalties)
        return d


@dataclass(frozen=True)
class DiscCandidate:
    """Diagonal polynomial candidate.

    ``kind == "disc"``: coordinate ``i`` is ``sum_k coeffs[i][k] * zeta_i**k``
    (maps of the polydisc into a product).  ``kind == "dual"``: coordinate
    ``i`` is ``p_i(u) - p_i(u_i)`` with ``u = (x - centers[i])/scales[i]``,
    ``u_i`` the image of the base point ``bases[i]`` and ``p_i`` the
    polynomial with coefficients ``coeffs[i]``; annulus factors add
    ``sum_k laurent[i][k-1] * ((rho/x)**k - (rho/base)**k)``.
    """

    kind: str
    coeffs: tuple
    centers: tuple = ()
    scales: tuple = ()
    bases: tuple = ()
    laurent: tuple = ()
    laurent_radius: tuple = ()

    @property
    def degree(self) -> int:
        return max(len(c) - 1 for c in self.coeffs)

    def coordinate(self, i: int, x):
        P = np.polynomial.polynomial
        x = np.asarray(x, dtype=complex)
        c = self.coeffs[i]
        if self.kind == "disc":
            return P.polyval(x, c)
        u = (x - self.centers[i]) / self.scales[i]
        u0 = (self.bases[i] - self.centers[i]) / self.scales[i]
        out = P.polyval(u, c) - P.polyval(u0, c)
        lc = self.laurent[i] if self.laurent else None
        if lc is not None and len(lc):
            rho, z0 = self.laurent_radius[i], self.bases[i]
            e = np.concatenate([[0], lc])
            out = out + P.polyval(rho / x, e) - P.polyval(rho / z0, e)
        return out

    def derivative_at_base(self, i: int) -> complex:
        """``f_i'(0)`` (disc kind) or ``g_i'(z_i)`` (dual kind)."""
        P = np.polynomial.polynomial
        c = self.coeffs[i]
        if self.kind == "disc":
            return complex(c[1]) if len(c) > 1 else 0j
        u0 = (self.bases[i] - self.centers[i]) / self.scales[i]
        d = complex(P.polyval(u0, P.polyder(c))) / self.scales[i]
        lc = self.laurent[i] if self.laurent else None
        if lc is not None and len(lc):
            rho, z0 = self.laurent_radius[i], self.bases[i]
            k = np.arange(1, len(lc) + 1)
            d += complex(np.sum(-k * np.asarray(lc) * rho ** k / z0 ** (k + 1)))
        return d

    def __call__(self, x):
        return np.stack([self.coordinate(i, x[i]) for i in range(len(self.coeffs))])


@dataclass
class OracleResult:
    problem: str
    bound: float
    direction: str  # upper | lower
    candidate: DiscCandidate | None
    margin: float
    iterations: int
    converged: bool
    degree: int
    seed: int
    history: list = field(default_factory=list)  # best bound after each degree level

    def to_row(self) -> list:
        return [self.problem, self.bound, self.direction, self.degree, self.seed, self.margin, self.iterations]


LEDGER_HEADER = ["problem", "bound", "direction", "degree", "seed", "margin", "iterations"]


def append_ledger(path, result: OracleResult) -> None:
    """Append one row to a CSV ledger, writing the header for a new file."""
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(LEDGER_HEADER)
        row = result.to_row()
        w.writerow([f"{x:.15g}" if isinstance(x, float) else x for x in row])


# ---------------------------------------------------------------------------
# grids


def _circle(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


_T_FINE = 2 * np.pi * np.arange(FINE) / FINE


def _circle_peak(fn, degree: int, m: int, top: int = 8) -> float:
    """Maximum over ``t`` of a nonnegative trigonometric polynomial ``fn``.

    ``fn`` has degree ``2*degree`` (it is ``|p|^2``).  Any global maximizer
    lies within one grid step of a sample whose value exceeds
    ``max * (1 - 2 degree^2 (pi/m)^2)``; those brackets are refined locally.
    """
    t = 2 * np.pi * np.arange(m) / m
    v = fn(t)
    vmax = float(np.max(v))
    thr = vmax * (1.0 - 2.0 * degree ** 2 * (math.pi / m) ** 2)
    local = (v >= np.roll(v, 1)) & (v >= np.roll(v, -1))
    idx = np.flatnonzero(local & (v >= thr))
    if len(idx) > top:
        idx = idx[np.argsort(v[idx])[-top:]]
    h = 2 * np.pi / m
    best = vmax
    for k in idx:
        res = minimize_scalar(lambda x: -float(fn(np.array([x]))[0]),
                              bounds=(t[k] - h, t[k] + h), method="bounded",
                              options=dict(xatol=1e-13))
        best = max(best, -float(res.fun))
    return best


def _largest_ok(ok, refine: bool) -> float:
    """Largest ``s`` in [0, 1] with ``ok(s)`` by bisection (monotone predicate)."""
    if ok(1.0, True):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    if refine and not ok(lo, True):
        # the sampled predicate can be optimistic by O(d^2/m^2); settle with the exact one
        hi = lo
        while lo > 0 and not ok(lo, True):
            hi, lo = lo, lo * (1 - 1e-6)
        for _ in range(20):
            mid = 0.5 * (lo + hi)
            if ok(mid, True):
                lo = mid
            else:
                hi = mid
    return lo


def _polar(n_ang: int, n_rad: int, rmax: float = 1.0) -> np.ndarray:
    radii = rmax * np.arange(1, n_rad + 1) / n_rad
    return (radii[:, None] * _circle(n_ang)[None, :]).ravel()


# ---------------------------------------------------------------------------
# single-factor searches


@dataclass(frozen=True)
class _FactorResult:
    coeffs: tuple
    laurent: tuple
    value: float  # |f'(0)| (disc) or |g'(z)| (dual), after feasibility restoration
    margin: float
    evals: int
    history: tuple
    converged: bool


class _Problem:
    """One factor: ``kind`` is "disc" (Δ -> domain) or "dual" (domain -> Δ)."""

    def __init__(self, domain: PlanarDomain, z: complex, kind: str, cfg: OptimizerConfig):
        self.domain, self.z, self.kind, self.cfg = domain, complex(z), kind, cfg
        self.laurent = kind == "dual" and domain.kind == "annulus"
        if kind == "disc":
            self.scale = domain.bounding_disc()[1] if domain.bounded else max(abs(z), 1.0)
            if domain.simply_connected:
                self.search = _circle(cfg.grid)
                self.fine = _circle(FINE)
                self.check = _circle(2 * cfg.grid)
            else:
                self.search = _polar(cfg.grid, cfg.radial)
                self.fine = _polar(8 * cfg.grid, 4 * cfg.radial)
                self.check = _polar(2 * cfg.grid, 2 * cfg.radial)
            self.certified = domain.kind in ("unit_disc", "disc") and domain.simply_connected
        else:
            if not domain.bounded:
                raise ValueError(f"no bounded polynomial maps out of {domain.kind}")
            self.center, self.R = domain.bounding_disc()
            self.search = domain.boundary_samples(cfg.grid)
            if domain.kind == "truncated_cone":
                self.fine = domain.boundary_samples(FINE)
                self.check = domain.boundary_samples(2 * cfg.grid)
            else:
                self.fine = domain.boundary_samples(FINE)
                self.check = domain.boundary_samples(2 * cfg.grid)
            self.certified = domain.kind != "truncated_cone"
            self.rho = domain.inner if self.laurent else None

    # parameter packing.  disc: x = [c1 (real), Re c2..cd, Im c2..cd]
    # dual: x = [Re b1..bd, Im b1..bd (, Re e1..ed, Im e1..ed)]
    def unpack(self, x, d):
        c = np.zeros(d + 1, complex)
        e = None
        if self.kind == "disc":
            c[0] = self.z
            c[1] = x[0]
            m = d - 1
            c[2:] = x[1:1 + m] + 1j * x[1 + m:1 + 2 * m]
            return c, e
        c[1:] = x[:d] + 1j * x[d:2 * d]
        if self.laurent:
            e = x[2 * d:3 * d] + 1j * x[3 * d:4 * d]
        return c, e

    def pack(self, c, e, d):
        cc = np.zeros(d + 1, complex)
        cc[:len(c)] = c
        if self.kind == "disc":
            return np.concatenate([[cc[1].real], cc[2:].real, cc[2:].imag])
        parts = [cc[1:].real, cc[1:].imag]
        if self.laurent:
            ee = np.zeros(d, complex)
            if e is not None:
                ee[:len(e)] = e
            parts += [ee.real, ee.imag]
        return np.concatenate(parts)

    def _dual_values(self, c, e, pts):
        # g(x) = sum b_k (u^k - u0^k) + sum e_k ((rho/x)^k - (rho/z)^k), u = (x - center)/R
        u = (pts - self.center) / self.R
        u0 = (self.z - self.center) / self.R
        out = np.polynomial.polynomial.polyval(u, c) - np.polynomial.polynomial.polyval(u0, c)
        if e is not None:
            ee = np.concatenate([[0], e])
            out = out + np.polynomial.polynomial.polyval(self.rho / pts, ee) - np.polynomial.polynomial.polyval(self.rho / self.z, ee)
        return out

    def _dual_deriv(self, c, e) -> complex:
        u0 = (self.z - self.center) / self.R
        d = np.polynomial.polynomial.polyval(u0, np.polynomial.polynomial.polyder(c)) / self.R
        if e is not None:
            k = np.arange(1, len(e) + 1)
            d = d + np.sum(-k * e * self.rho ** k / self.z ** (k + 1))
        return complex(d)

    def margins(self, c, e, pts):
        if self.kind == "disc":
            return self.domain.margin(np.polynomial.polynomial.polyval(pts, c)) / self.scale
        return 1.0 - np.abs(self._dual_values(c, e, pts))

    def objective_value(self, c, e):
        if self.kind == "disc":
            return c[1].real / self.scale
        return self._dual_deriv(c, e).real

    def _circles(self):
        """Boundary circles ``(center, radius)`` of a dual problem's domain, or None."""
        dom = self.domain
        if dom.kind in ("unit_disc", "disc"):
            return [dom.bounding_disc()]
        if dom.kind == "annulus":
            return [(0j, dom.inner), (0j, dom.outer)]
        return None

    def restore(self, c, e, d):
        """Feasibility-restoring shrink; returns (c, e, value)."""
        P = np.polynomial.polynomial
        if self.kind == "disc":
            powers = np.arange(d + 1)
            if self.certified:
                a, r = self.domain.bounding_disc()
                # exact for disc targets: max over |zeta| = s of |f - a| <= r
                def ok(s, exact=False):
                    cs = c * s ** powers
                    fn = lambda t: np.abs(P.polyval(np.exp(1j * t), cs) - a) ** 2
                    peak = _circle_peak(fn, d, FINE) if exact else float(np.max(fn(_T_FINE)))
                    return peak <= r * r
            else:
                def ok(s, exact=False):
                    cs = c * s ** powers
                    return np.min(self.domain.margin(P.polyval(self.fine, cs))) >= 0
            lo = _largest_ok(ok, self.certified)
            cs = c * lo ** powers
            cs[0] = self.z
            return cs, e, abs(cs[1].real)
        circles = self._circles()
        if circles is None:
            mx = float(np.max(np.abs(self._dual_values(c, e, self.fine))))
        else:
            mx = 0.0
            for cc, rr in circles:
                fn = lambda t, cc=cc, rr=rr: np.abs(self._dual_values(c, e, cc + rr * np.exp(1j * t))) ** 2
                mx = max(mx, math.sqrt(_circle_peak(fn, 2 * d if self.laurent else d, FINE)))
        if mx <= 0:
            return c, e, 0.0
        s = 1.0 / mx
        cs = c * s
        es = e * s if e is not None else None
        return cs, es, abs(self._dual_deriv(cs, es))

    def initial(self):
        """Degree-1 feasible start."""
        if self.kind == "disc":
            r0 = 0.5 * float(self.domain.margin(self.z))
            return np.array([self.z, r0]), None
        u0 = (self.z - self.center) / self.R
        return np.array([0.0, 1.0 / (1.0 + abs(u0))]), (np.zeros(1) if self.laurent else None)

    def affine(self, d, pts):
        """Values at ``pts`` and the objective as affine maps of the packed vector."""
        n = len(self.pack(np.zeros(d + 1, complex), None, d))
        eye = np.eye(n)
        zero = np.zeros(n)
        c0, e0 = self.unpack(zero, d)
        base_v = self._values(c0, e0, pts)
        base_o = self.objective_value(c0, e0)
        A = np.empty((len(pts), n), complex)
        g = np.empty(n)
        for j in range(n):
            c, e = self.unpack(eye[j], d)
            A[:, j] = self._values(c, e, pts) - base_v
            g[j] = self.objective_value(c, e) - base_o
        return base_v, A, g

    def _values(self, c, e, pts):
        if self.kind == "disc":
            return np.polynomial.polynomial.polyval(pts, c)
        return self._dual_values(c, e, pts)

    def level(self, c0, e0, d, rng):
        """One penalized local search at degree ``d`` from a padded start."""
        cfg = self.cfg
        x0 = self.pack(c0, e0, d)
        n = len(x0)
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        step = cfg.step * max(float(np.max(np.abs(x0))), 1e-3)
        base, A, g = self.affine(d, self.search)
        if self.kind == "disc":
            dom, scale = self.domain, self.scale

            def margin(x):
                return dom.margin(base + A @ x) / scale
        else:
            def margin(x):
                return 1.0 - np.abs(base + A @ x)
        evals = 0
        converged = True
        for w in cfg.penalties:
            def obj(x, w=w):
                m = np.minimum(margin(x), 0.0)
                return -float(g @ x) + w * float(m @ m)

            sim = np.vstack([x0, x0 + step * Q.T])
            res = minimize(obj, x0, method="Nelder-Mead",
                           options=dict(maxfev=cfg.max_evals * n, xatol=1e-11, fatol=1e-13,
                                        adaptive=True, initial_simplex=sim))
            evals += int(res.nfev)
            converged = converged and bool(res.success)
            x0 = res.x
            step *= 0.1
        c, e = self.unpack(x0, d)
        if self.kind == "disc" and c[1].real < 0:
            c = c * np.exp(1j * np.pi * np.arange(d + 1))  # rotate zeta -> -zeta
            c[0] = self.z
        return self.restore(c, e, d), evals, converged


@lru_cache(maxsize=256)
def _solve_factor(domain: PlanarDomain, z: complex, kind: str, cfg: OptimizerConfig) -> _FactorResult:
    prob = _Problem(domain, z, kind, cfg)
    best = None
    total = 0
    for run in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, run])
        c, e = prob.initial()
        c, e, val = prob.restore(c.astype(complex), e, 1)
        hist = [val]
        conv = True
        for d in range(1, cfg.degree + 1):
            (c2, e2, v2), ev, ok = prob.level(c, e, d, rng)
            total += ev
            if v2 > val:
                c, e, val = c2, e2, v2
                conv = ok
            hist.append(val)
        if best is None or val > best[2]:
            best = (c, e, val, hist, conv)
    c, e, val, hist, conv = best
    margin = float(np.min(prob.margins(c, e, prob.check))) * (prob.scale if kind == "disc" else 1.0)
    # the last level must no longer move the bound appreciably
    converged = conv and (len(hist) < 2 or hist[-1] - hist[-2] <= 1e-4 * max(hist[-1], 1e-300))
    lau = tuple(e) if e is not None else ()
    return _FactorResult(tuple(c), lau, float(val), margin, total, tuple(hist), converged)


def _as_product(domain) -> ProductDomain:
    return domain if isinstance(domain, ProductDomain) else ProductDomain.of(domain)


def _point(z, n):
    z = tuple(complex(x) for x in np.atleast_1d(z))
    if len(z) != n:
        raise ValueError("point dimension mismatch")
    return z


def _check_interior(domain: ProductDomain, z):
    if not domain.contains(z):
        raise ValueError("base point must lie in the interior")


def _candidate(kind, domain, z, results) -> DiscCandidate:
    coeffs = tuple(np.array(r.coeffs) for r in results)
    if kind == "disc":
        return DiscCandidate("disc", coeffs)
    centers = tuple(complex(f.bounding_disc()[0]) for f in domain.factors)
    scales = tuple(float(f.bounding_disc()[1]) for f in domain.factors)
    laurent = tuple(np.array(r.laurent) for r in results)
    radii = tuple(f.inner if f.kind == "annulus" else None for f in domain.factors)
    return DiscCandidate("dual", coeffs, centers, scales, tuple(z), laurent, radii)


def kobayashi_upper_oracle(domain, z, v, config: OptimizerConfig = OptimizerConfig()) -> OracleResult:
    """Upper bound on ``F^K_D(z, v)`` from the best feasible analytic disc."""
    domain = _as_product(domain)
    z, v = _point(z, domain.dim), _point(v, domain.dim)
    _check_interior(domain, z)
    if all(x == 0 for x in v):
        raise ValueError("tangent vector must be nonzero")
    results = [_solve_factor(f, zi, "disc", config) for f, zi in zip(domain.factors, z)]
    # disc g_i with g_i'(0) = c_i reparametrized to derivative lambda*v_i needs lambda <= c_i/|v_i|
    lam = min(r.value / abs(vi) for r, vi in zip(results, v) if vi != 0)
    bound = 1.0 / lam if lam > 0 else math.inf
    return OracleResult(
        problem="kobayashi", bound=bound, direction="upper",
        candidate=_candidate("disc", domain, z, results),
        margin=min(r.margin for r in results),
        iterations=sum(r.evals for r in results),
        converged=all(r.converged for r in results),
        degree=config.degree, seed=config.seed,
        history=_merge_history(results, lambda vals: 1.0 / min(x / abs(vi) for x, vi in zip(vals, v) if vi != 0)),
    )


def eisenman_upper_oracle(domain, z, config: OptimizerConfig = OptimizerConfig()) -> OracleResult:
    """Upper bound on ``M^E_D(z)`` from a diagonal polydisc map centered at ``z``."""
    domain = _as_product(domain)
    z = _point(z, domain.dim)
    _check_interior(domain, z)
    results = [_solve_factor(f, zi, "disc", config) for f, zi in zip(domain.factors, z)]
    jac = float(np.prod([r.value for r in results]))
    return OracleResult(
        problem="eisenman", bound=1.0 / jac ** 2 if jac > 0 else math.inf, direction="upper",
        candidate=_candidate("disc", domain, z, results),
        margin=min(r.margin for r in results),
        iterations=sum(r.evals for r in results),
        converged=all(r.converged for r in results),
        degree=config.degree, seed=config.seed,
        history=_merge_history(results, lambda vals: 1.0 / float(np.prod(vals)) ** 2),
    )


def caratheodory_lower_oracle(domain, z, config: OptimizerConfig = OptimizerConfig()) -> OracleResult:
    """Lower bound on ``M^C_D(z)`` from a diagonal map into the polydisc vanishing at ``z``."""
    domain = _as_product(domain)
    z = _point(z, domain.dim)
    _check_interior(domain, z)
    results = [_solve_factor(f, zi, "dual", config) for f, zi in zip(domain.factors, z)]
    jac = float(np.prod([r.value for r in results]))
    return OracleResult(
        problem="caratheodory", bound=jac ** 2, direction="lower",
        candidate=_candidate("dual", domain, z, results),
        margin=min(r.margin for r in results),
        iterations=sum(r.evals for r in results),
        converged=all(r.converged for r in results),
        degree=config.degree, seed=config.seed,
        history=_merge_history(results, lambda vals: float(np.prod(vals)) ** 2),
    )


def _merge_history(results, combine) -> list:
    n = len(results[0].history)
    return [combine([r.history[k] for r in results]) for k in range(n)]


# ---------------------------------------------------------------------------


def feasibility_margin(candidate, domain, resolution: int = 1000) -> float:
    """Worst target-membership margin of ``candidate`` on a sample grid.

    ``candidate`` is a :class:`DiscCandidate` or a vectorized callable of
    ``zeta``.  Disc-kind candidates and callables are evaluated on a polar
    grid of the closed unit disc (toroidal for products); dual candidates
    on domain boundary samples, where the margin is ``1 - |g|``.
    """
    domain = _as_product(domain)
    n_ang = max(int(resolution), 8)
    n_rad = max(n_ang // 50, 4)
    grid = _polar(n_ang, n_rad)
    if callable(candidate) and not isinstance(candidate, DiscCandidate):
        if domain.dim != 1:
            raise ValueError("callable candidates are one-dimensional")
        return float(np.min(domain.factors[0].margin(candidate(grid))))
    if candidate.kind == "disc":
        return float(min(np.min(f.margin(candidate.coordinate(i, grid)))
                         for i, f in enumerate(domain.factors)))
    return float(min(np.min(1.0 - np.abs(candidate.coordinate(i, f.boundary_samples(n_ang))))
                     for i, f in enumerate(domain.factors)))


def result_json(res: OracleResult) -> str:
    rec = {k: getattr(res, k) for k in ("problem", "bound", "direction", "margin", "iterations",
                                         "converged", "degree", "seed")}
    return json.dumps(rec, sort_keys=True)
