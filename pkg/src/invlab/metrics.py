"""Invariant metrics and measures on products of model planar domains.

Closed forms reduce to Poincaré densities of the factors:

* Kobayashi–Royden metric of a product: maximum of the factor metrics;
* Eisenman–Kobayashi measure: product of squared factor densities;
* Carathéodory measure: equal to the Eisenman measure when every factor is
  simply connected; for annulus factors only an oracle lower bound exists.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .planar import PlanarDomain, poincare_density

__all__ = [
    "ProductDomain",
    "Tangent",
    "Measure",
    "MeasureValue",
    "Violation",
    "DecreasingReport",
    "kobayashi_royden",
    "eisenman_measure",
    "caratheodory_measure",
    "measure_ratio",
    "check_decreasing",
    "load_points_csv",
    "save_points_csv",
]


@dataclass(frozen=True)
class ProductDomain:
    factors: tuple[PlanarDomain, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not 1 <= len(self.factors) <= 2:
            raise ValueError("only one- and two-factor products are supported")

    @classmethod
    def of(cls, *factors: PlanarDomain) -> ProductDomain:
        return cls(tuple(factors))

    @classmethod
    def polydisc(cls, n: int) -> ProductDomain:
        return cls(tuple(PlanarDomain.unit_disc() for _ in range(n)))

    @property
    def dim(self) -> int:
        return len(self.factors)

    def margin(self, z) -> float:
        z = _as_point(z, self.dim)
        return min(float(f.margin(zi)) for f, zi in zip(self.factors, z))

    def contains(self, z) -> bool:
        return self.margin(z) > 0

    def to_json(self) -> dict:
        return {"factors": [f.to_json() for f in self.factors]}

    @classmethod
    def from_json(cls, data: dict) -> ProductDomain:
        return cls(tuple(PlanarDomain.from_json(f) for f in data["factors"]))


@dataclass(frozen=True)
class Tangent:
    point: tuple[complex, ...]
    vector: tuple[complex, ...]

    def __post_init__(self):
        p = tuple(complex(x) for x in np.atleast_1d(self.point))
        v = tuple(complex(x) for x in np.atleast_1d(self.vector))
        if len(p) != len(v) or len(p) not in (1, 2):
            raise ValueError("point and vector must share dimension 1 or 2")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "vector", v)

    def to_json(self) -> dict:
        return {
            "point": [[z.real, z.imag] for z in self.point],
            "vector": [[z.real, z.imag] for z in self.vector],
        }

    @classmethod
    def from_json(cls, data: dict) -> Tangent:
        return cls(tuple(complex(a, b) for a, b in data["point"]),
                   tuple(complex(a, b) for a, b in data["vector"]))


class Measure(NamedTuple):
    value: float
    method: str  # closed_form | pullback | oracle

    @property
    def exact(self) -> bool:
        return self.method != "oracle"


@dataclass(frozen=True)
class MeasureValue:
    caratheodory: float
    eisenman: float
    method: str

    def __post_init__(self):
        if self.method != "oracle" and self.caratheodory > self.eisenman * (1 + 1e-12):
            raise ValueError("exact Carathéodory measure exceeds Eisenman measure")

    @property
    def exact(self) -> bool:
        return self.method != "oracle"

    @property
    def ratio(self) -> float:
        return self.caratheodory / self.eisenman

    def to_json(self) -> dict:
        return {"caratheodory": self.caratheodory, "eisenman": self.eisenman,
                "method": self.method, "ratio": self.ratio}


def _as_point(z, n: int) -> tuple[complex, ...]:
    z = tuple(complex(x) for x in np.atleast_1d(z))
    if len(z) != n:
        raise ValueError(f"expected a point of dimension {n}, got {len(z)}")
    return z


def _factor_method(f: PlanarDomain) -> str:
    return "closed_form" if f.kind in ("unit_disc", "disc", "upper_half_plane") else "pullback"


def _check_inside(domain: ProductDomain, z) -> tuple[complex, ...]:
    z = _as_point(z, domain.dim)
    if not domain.contains(z):
        raise ValueError("point outside the domain")
    return z


def kobayashi_royden(domain: ProductDomain, t: Tangent) -> float:
    """Infinitesimal Kobayashi metric; product law is the max over factors."""
    z = _check_inside(domain, t.point)
    if len(t.vector) != domain.dim:
        raise ValueError("vector dimension mismatch")
    return max(poincare_density(f, zi) * abs(vi)
               for f, zi, vi in zip(domain.factors, z, t.vector))


def eisenman_measure(domain: ProductDomain, z) -> float:
    z = _check_inside(domain, z)
    return float(np.prod([poincare_density(f, zi) ** 2 for f, zi in zip(domain.factors, z)]))


def caratheodory_measure(domain: ProductDomain, z, config=None) -> Measure:
    """Carathéodory measure; for annulus factors an oracle lower bound.

    ``config`` is the :class:`~invlab.oracle.OptimizerConfig` used for the
    annulus factors (ignored when every factor is simply connected).
    """
    z = _check_inside(domain, z)
    value = 1.0
    methods = []
    for f, zi in zip(domain.factors, z):
        if f.simply_connected:
            value *= poincare_density(f, zi) ** 2
            methods.append(_factor_method(f))
        else:
            from .oracle import caratheodory_lower_oracle, OptimizerConfig

            res = caratheodory_lower_oracle(ProductDomain.of(f), (zi,), config or OptimizerConfig())
            value *= res.bound
            methods.append("oracle")
    return Measure(value, _combine(methods))


def _combine(methods: Sequence[str]) -> str:
    if "oracle" in methods:
        return "oracle"
    if "pullback" in methods:
        return "pullback"
    return "closed_form"


def measure_ratio(domain: ProductDomain, z, config=None) -> MeasureValue:
    """``M^C / M^E`` with the method tag of the weakest ingredient."""
    e = eisenman_measure(domain, z)
    c = caratheodory_measure(domain, z, config)
    return MeasureValue(c.value, e, c.method)


# ---------------------------------------------------------------------------
# decreasing property under holomorphic maps


@dataclass(frozen=True)
class Violation:
    index: int
    quantity: str  # kobayashi | eisenman | caratheodory
    source_value: float
    pushed_value: float

    @property
    def margin(self) -> float:
        return self.source_value - self.pushed_value


@dataclass
class DecreasingReport:
    checked: int
    comparisons: int
    violations: list[Violation]
    min_relative_gap: float  # min over samples of (lhs - rhs)/scale; >= -tol means OK

    @property
    def ok(self) -> bool:
        return not self.violations


def _violates(lhs: float, rhs: float, tol: float) -> tuple[bool, float]:
    scale = max(1.0, abs(lhs), abs(rhs))
    gap = (lhs - rhs) / scale
    return gap < -tol, gap


def check_decreasing(f, samples: Sequence[Tangent], tol: float = 1e-8,
                     feasibility_tol: float = 1e-8, check_feasible: bool = True,
                     rng: np.random.Generator | None = None) -> DecreasingReport:
    """Check the Schwarz–Pick inequalities for ``f`` at each sample.

    ``F_{D1}(p, v) >= F_{D2}(f(p), f'(p) v)`` and, for equidimensional maps,
    ``M_{D1}(p) >= M_{D2}(f(p)) |det f'(p)|^2`` for both measures whenever
    both sides are exact.  Raises ``ValueError`` when ``f`` visibly leaves
    its target.
    """
    if check_feasible:
        margin = f.feasibility_margin(rng=rng)
        if margin < -feasibility_tol:
            raise ValueError(f"map leaves its target (margin {margin:.3e})")
    src, dst = f.source, f.target
    violations: list[Violation] = []
    gaps = [np.inf]
    comparisons = 0
    for i, t in enumerate(samples):
        p = np.array(t.point)
        q = f(p)
        J = f.jacobian(p)
        pushed = Tangent(tuple(q), tuple(J @ np.array(t.vector)))
        lhs = kobayashi_royden(src, t)
        rhs = kobayashi_royden(dst, pushed)
        bad, gap = _violates(lhs, rhs, tol)
        comparisons += 1
        gaps.append(gap)
        if bad:
            violations.append(Violation(i, "kobayashi", lhs, rhs))
        if src.dim != dst.dim:
            continue
        jac2 = abs(np.linalg.det(J)) ** 2
        lhs = eisenman_measure(src, p)
        rhs = eisenman_measure(dst, q) * jac2
        bad, gap = _violates(lhs, rhs, tol)
        comparisons += 1
        gaps.append(gap)
        if bad:
            violations.append(Violation(i, "eisenman", lhs, rhs))
        if all(d.simply_connected for d in src.factors + dst.factors):
            lhs = caratheodory_measure(src, p).value
            rhs = caratheodory_measure(dst, q).value * jac2
            bad, gap = _violates(lhs, rhs, tol)
            comparisons += 1
            gaps.append(gap)
            if bad:
                violations.append(Violation(i, "caratheodory", lhs, rhs))
    return DecreasingReport(len(samples), comparisons, violations, float(min(gaps)))


# ---------------------------------------------------------------------------
# batch I/O


def load_points_csv(path) -> list[tuple[complex, ...]]:
    """Read points from a CSV with columns re_z1, im_z1[, re_z2, im_z2]."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = len(header) // 2
        for row in reader:
            vals = [float(x) for x in row]
            out.append(tuple(complex(vals[2 * k], vals[2 * k + 1]) for k in range(n)))
    return out


def save_points_csv(path, points: Sequence[Sequence[complex]]) -> None:
    n = len(points[0])
    header = [c for k in range(1, n + 1) for c in (f"re_z{k}", f"im_z{k}")]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for p in points:
            w.writerow([f"{x:.15g}" for z in p for x in (z.real, z.imag)])


def measure_record(domain: ProductDomain, z) -> str:
    """JSON record of both measures at ``z``."""
    z = _as_point(z, domain.dim)
    mv = measure_ratio(domain, z)
    rec = {"domain": domain.to_json(), "point": [[w.real, w.imag] for w in z], **mv.to_json()}
    return json.dumps(rec, sort_keys=True)
