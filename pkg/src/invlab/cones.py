"""Boundary asymptotics of the invariant measure of truncated cones.

For the truncated cone ``Γ^ε_θ = {|arg(-z)| < θ, |z| < ε}`` the
Eisenman and Carathéodory measures coincide with the squared Poincaré
density.  Along a sequence ``z_j = r_j e^{i(π+α_j)}`` tending to the
vertex, the ratio of the measures of two nested cones converges to

    (θ₂ cos(απ/2θ₂) / (θ₁ cos(απ/2θ₁)))²,

independently of the truncation radii.  This module evaluates the
measures through the conformal chart, extrapolates the ratio sequence and
runs the product "sandwich" experiments built from these factors.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .metrics import ProductDomain, caratheodory_measure, eisenman_measure
from .planar import PlanarDomain, poincare_density

__all__ = [
    "ConeDensity",
    "BoundarySequence",
    "RatioExperimentConfig",
    "ProductSandwichConfig",
    "ExperimentReport",
    "cone_density_closed_form",
    "limit_ratio",
    "richardson",
    "ratio_experiment",
    "product_sandwich_experiment",
]

log = logging.getLogger(__name__)


class ConeDensity(NamedTuple):
    paper_expression: float
    pullback_value: float
    relative_discrepancy: float


def _printed_formula(theta, eps, r, phi):
    """The published closed form, transcribed term by term."""
    t = (r / eps) ** (math.pi / (2 * theta))
    s = np.sin(math.pi * phi / (2 * theta))
    lead = 1.0 / (theta * np.cos(math.pi * phi / (2 * theta))) ** 2
    num = math.pi ** 2 * (1 + (r / eps) ** (math.pi / theta) - 2 * t * s) * (1 + (r / eps) ** (math.pi / theta) + 2 * t * s)
    den = 4 * r * (1 - (r / eps) ** (math.pi / theta)) ** 2
    return lead * num / den


def cone_density_closed_form(theta: float, eps: float, r, phi) -> ConeDensity:
    """Printed closed form versus the chart pullback ``λ²`` at ``z = r e^{i(π+φ)}``.

    The pullback is authoritative; the printed expression is kept verbatim
    and their relative discrepancy is reported, not reconciled.  Array
    arguments broadcast.
    """
    if not 0 < theta < math.pi or eps <= 0:
        raise ValueError("need 0 < theta < pi and eps > 0")
    r, phi = np.broadcast_arrays(np.asarray(r, float), np.asarray(phi, float))
    if np.any(r <= 0) or np.any(r >= eps) or np.any(np.abs(phi) >= theta):
        raise ValueError("need 0 < r < eps and |phi| < theta")
    z = r * np.exp(1j * (math.pi + phi))
    lam = poincare_density(PlanarDomain.truncated_cone(theta, eps), z)
    pull = np.asarray(lam) ** 2
    printed = _printed_formula(theta, eps, r, phi)
    disc = np.abs(printed - pull) / pull
    if np.ndim(pull) == 0:
        return ConeDensity(float(printed), float(pull), float(disc))
    return ConeDensity(printed, pull, disc)


def limit_ratio(theta1: float, theta2: float, alpha: float) -> float:
    """``(θ₂ cos(απ/2θ₂) / (θ₁ cos(απ/2θ₁)))²``."""
    if not 0 < theta1 < theta2 < math.pi:
        raise ValueError("need 0 < theta1 < theta2 < pi")
    if abs(alpha) >= theta1:
        raise ValueError("need |alpha| < theta1")
    num = theta2 * math.cos(alpha * math.pi / (2 * theta2))
    den = theta1 * math.cos(alpha * math.pi / (2 * theta1))
    return (num / den) ** 2


# ---------------------------------------------------------------------------
# sequences and extrapolation


@dataclass(frozen=True)
class BoundarySequence:
    """``z_j = r_j e^{i(π+α_j)}`` with ``r_j = r0 q^j``, ``j = 1..n``.

    ``approach="constant"`` keeps ``α_j = alpha``; ``"harmonic"`` uses
    ``α_j = alpha (1 - 1/j)``.
    """

    r0: float = 1.0
    q: float = 0.5
    n: int = 40
    alpha: float = 0.0
    approach: str = "constant"

    def __post_init__(self):
        if not (self.r0 > 0 and 0 < self.q < 1 and self.n >= 3):
            raise ValueError("need r0 > 0, 0 < q < 1 and at least 3 terms")
        if self.approach not in ("constant", "harmonic"):
            raise ValueError(f"unknown approach {self.approach!r}")

    @property
    def index(self) -> np.ndarray:
        return np.arange(1, self.n + 1)

    def radii(self) -> np.ndarray:
        return self.r0 * self.q ** self.index.astype(float)

    def angles(self) -> np.ndarray:
        j = self.index.astype(float)
        if self.approach == "constant":
            return np.full(self.n, float(self.alpha))
        return self.alpha * (1.0 - 1.0 / j)

    def points(self) -> np.ndarray:
        return self.radii() * np.exp(1j * (math.pi + self.angles()))


def richardson(h: np.ndarray, values: np.ndarray) -> float:
    """Polynomial extrapolation of ``values(h)`` to ``h = 0`` (Lagrange form)."""
    h = np.asarray(h, float)
    values = np.asarray(values, float)
    out = 0.0
    for i in range(len(h)):
        w = 1.0
        for k in range(len(h)):
            if k != i:
                w *= h[k] / (h[k] - h[i])
        out += w * values[i]
    return float(out)


def _extrapolate(radii: np.ndarray, values: np.ndarray) -> tuple[float, list[int]]:
    """Richardson estimate from three levels; the plain tail once it has settled.

    Geometric convergence (constant angle) leaves nothing to extrapolate and
    the polynomial weights would only amplify roundoff.
    """
    idx = [p - 1 for p in _levels(len(values))]
    last = float(values[-1])
    if abs(values[-1] - values[-2]) <= 1e-12 * max(abs(last), 1.0):
        return last, idx
    est = richardson(1.0 / np.abs(np.log(radii[idx])), values[idx])
    return (est if np.isfinite(est) else last), idx


def _levels(n: int) -> list[int]:
    """Three extrapolation levels at the half, three-quarter and full depth."""
    return sorted({max(n // 2, 1), max(3 * n // 4, 2), n})


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class RatioExperimentConfig:
    theta1: float = math.pi / 3
    theta2: float = 2 * math.pi / 3
    eps1: float = 1.0
    eps2: float = 1.0
    sequence: BoundarySequence = BoundarySequence()

    def __post_init__(self):
        if not 0 < self.theta1 < self.theta2 < math.pi:
            raise ValueError("need 0 < theta1 < theta2 < pi")
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("truncation radii must be positive")
        if abs(self.sequence.alpha) >= self.theta1:
            raise ValueError("limit angle must satisfy |alpha| < theta1")

    @classmethod
    def from_json(cls, data: dict) -> RatioExperimentConfig:
        d = dict(data)
        seq = BoundarySequence(**d.pop("sequence", {}))
        return cls(sequence=seq, **d)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentReport:
    name: str
    rows: list[dict]
    extrapolated: float
    last_value: float
    target: float
    abs_error: float
    runtime: float = 0.0
    threshold: float | None = None  # acceptance bound, experiment-specific meaning
    passed: bool | None = None
    warnings: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def summary(self) -> dict:
        """Deterministic summary (runtime excluded)."""
        return {
            "name": self.name,
            "extrapolated": self.extrapolated,
            "last_value": self.last_value,
            "target": self.target,
            "abs_error": self.abs_error,
            "threshold": self.threshold,
            "passed": self.passed,
            "warnings": list(self.warnings),
            "diagnostics": self.diagnostics,
        }


def _tail_monotonicity(values: np.ndarray) -> dict:
    """Onset of monotone tail behaviour and the violations after it."""
    d = np.diff(values)
    if len(d) == 0:
        return {"onset": 0, "violations": []}
    sign = np.sign(d[-1]) if d[-1] != 0 else 0.0
    onset = len(d)
    while onset > 0 and (sign == 0 or np.sign(d[onset - 1]) in (sign, 0)):
        onset -= 1
    # tolerate roundoff-level wiggles once the sequence has converged
    scale = max(float(np.max(np.abs(values))), 1.0)
    bad = [int(i + 1) for i in range(onset, len(d)) if sign != 0 and np.sign(d[i]) == -sign
           and abs(d[i]) > 1e-13 * scale]
    return {"onset": int(onset + 1), "violations": bad}


def ratio_experiment(config: RatioExperimentConfig, threshold: float = 1e-3) -> ExperimentReport:
    """Measure ratio ``M_{Γ^{ε₁}_{θ₁}} / M_{Γ^{ε₂}_{θ₂}}`` along the sequence.

    Points outside either cone are skipped with a warning.  The limit is
    estimated by 3-level Richardson extrapolation in ``h = 1/|log r|``.
    """
    t0 = time.perf_counter()
    seq = config.sequence
    c1 = PlanarDomain.truncated_cone(config.theta1, config.eps1)
    c2 = PlanarDomain.truncated_cone(config.theta2, config.eps2)
    rows, notes = [], []
    for j, r, a, z in zip(seq.index, seq.radii(), seq.angles(), seq.points()):
        if c1.margin(z) <= 0 or c2.margin(z) <= 0:
            msg = f"j={j}: point outside a cone, skipped"
            notes.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            continue
        m1 = poincare_density(c1, z) ** 2
        m2 = poincare_density(c2, z) ** 2
        rows.append({"j": int(j), "r": float(r), "alpha": float(a), "m1": m1, "m2": m2, "ratio": m1 / m2})
    if len(rows) < 3:
        raise ValueError("sequence never enters both cones")
    ratios = np.array([row["ratio"] for row in rows])
    radii = np.array([row["r"] for row in rows])
    est, idx = _extrapolate(radii, ratios)
    last = float(ratios[-1])
    target = limit_ratio(config.theta1, config.theta2, seq.alpha)
    err = abs(est - target)
    return ExperimentReport(
        name="ratio-limit", rows=rows, extrapolated=est, last_value=last,
        target=target, abs_error=err, runtime=time.perf_counter() - t0,
        threshold=threshold, passed=err < threshold, warnings=notes,
        diagnostics={"levels": [rows[i]["j"] for i in idx], "tail": _tail_monotonicity(ratios)},
    )


@dataclass(frozen=True)
class ProductSandwichConfig:
    """Schedule ``θ₁ = π/2 - 1/m``, ``θ₂ = π/2 + 1/m``, ``ε = 1/m`` for ``m = m_min..m_max``.

    ``variant`` is ``"cone_cone"`` (both factors cones) or ``"disc_cone"``
    (a disc of radius ``delta`` times a cone).  The inner cone has radius
    ``ε/scale`` and the outer ``scale·ε``; ``schedule="degenerate"`` pins
    both angles at ``π/2``.
    """

    variant: str = "cone_cone"
    schedule: str = "standard"
    m_min: int = 2
    m_max: int = 20
    scale: float = 2.0
    delta: float = 0.5
    disc_point: complex = 0.1
    sequence: BoundarySequence = BoundarySequence()
    threshold: float = 5e-3

    def __post_init__(self):
        if self.variant not in ("cone_cone", "disc_cone"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.schedule not in ("standard", "degenerate"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if not 1 <= self.m_min <= self.m_max or self.scale < 1 or self.delta <= 0:
            raise ValueError("invalid schedule parameters")
        if abs(self.disc_point) >= self.delta:
            raise ValueError("disc point must lie in the disc factor")

    def angles(self, m: int) -> tuple[float, float, float]:
        if self.schedule == "degenerate":
            return math.pi / 2, math.pi / 2, 1.0 / m
        return math.pi / 2 - 1.0 / m, math.pi / 2 + 1.0 / m, 1.0 / m

    @classmethod
    def from_json(cls, data: dict) -> ProductSandwichConfig:
        d = dict(data)
        seq = BoundarySequence(**d.pop("sequence", {}))
        if "disc_point" in d and isinstance(d["disc_point"], (list, tuple)):
            d["disc_point"] = complex(*d["disc_point"])
        return cls(sequence=seq, **d)

    def to_json(self) -> dict:
        d = asdict(self)
        d["disc_point"] = [self.disc_point.real, self.disc_point.imag] if isinstance(self.disc_point, complex) \
            else [float(self.disc_point), 0.0]
        return d


def _products(cfg: ProductSandwichConfig, th1: float, th2: float, eps: float):
    inner = PlanarDomain.truncated_cone(th1, eps / cfg.scale)
    outer = PlanarDomain.truncated_cone(th2, eps * cfg.scale)
    if cfg.variant == "cone_cone":
        return ProductDomain.of(inner, inner), ProductDomain.of(outer, outer)
    disc = PlanarDomain.disc(0j, cfg.delta)
    return ProductDomain.of(disc, inner), ProductDomain.of(disc, outer)


def product_sandwich_experiment(cfg: ProductSandwichConfig) -> ExperimentReport:
    """``M^C`` of the outer product over ``M^E`` of the inner product along ``q_j``.

    For every ``m`` in the schedule the ``j``-limit is extrapolated as in
    :func:`ratio_experiment`; the report's estimate is the value at
    ``m_max`` and passes when it is at least ``1 - threshold``.
    """
    t0 = time.perf_counter()
    seq = cfg.sequence
    rows, notes = [], []
    for m in range(cfg.m_min, cfg.m_max + 1):
        th1, th2, eps = cfg.angles(m)
        if abs(seq.alpha) >= th1:
            notes.append(f"m={m}: limit angle outside the inner cone, skipped")
            continue
        inner, outer = _products(cfg, th1, th2, eps)
        vals, radii = [], []
        for r, a in zip(eps * seq.radii(), seq.angles()):
            w = r * np.exp(1j * (math.pi + a))
            q = (w, w) if cfg.variant == "cone_cone" else (complex(cfg.disc_point), w)
            if inner.margin(q) <= 0 or outer.margin(q) <= 0:
                continue
            vals.append(caratheodory_measure(outer, q).value / eisenman_measure(inner, q))
            radii.append(r)
        if len(vals) < 3:
            notes.append(f"m={m}: sequence never entered the asymptotic regime")
            continue
        vals = np.array(vals)
        est, _ = _extrapolate(np.array(radii), vals)
        n_cones = 2 if cfg.variant == "cone_cone" else 1
        pred = 1.0 if th1 == th2 else limit_ratio(th1, th2, seq.alpha) ** (-n_cones)
        rows.append({"m": m, "theta1": th1, "theta2": th2, "eps": eps,
                     "estimate": est, "last": float(vals[-1]), "limit_prediction": pred})
    if not rows:
        raise ValueError("schedule exhausted before entering the asymptotic regime")
    final = rows[-1]
    err = abs(1.0 - final["estimate"])
    return ExperimentReport(
        name=f"product-sandwich[{cfg.variant}]", rows=rows, extrapolated=final["estimate"],
        last_value=final["last"], target=1.0, abs_error=err,
        runtime=time.perf_counter() - t0, threshold=cfg.threshold,
        passed=final["estimate"] >= 1.0 - cfg.threshold, warnings=notes,
        diagnostics={"final_m": final["m"], "limit_prediction": final["limit_prediction"]},
    )
