"""Named experiments behind the ``lab`` command.

Each runner takes a plain JSON config dict and a seed, and returns an
:class:`Outcome`: a deterministic summary, optional tables for CSV output
and the pass/fail verdict against the experiment's acceptance thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import cones
from .leviflat import LeafPath, catalog, df_normalize, from_json as df_from_json, peak_check, trace_leaf
from .metrics import ProductDomain, caratheodory_measure, eisenman_measure, measure_ratio
from .oracle import OptimizerConfig, caratheodory_lower_oracle, eisenman_upper_oracle
from .planar import PlanarDomain, poincare_density

__all__ = ["Outcome", "EXPERIMENTS", "run_experiment"]


@dataclass
class Outcome:
    summary: dict
    passed: bool
    tables: dict = field(default_factory=dict)  # name -> (header, rows)


def _take(cfg: dict, allowed: set, name: str) -> dict:
    extra = set(cfg) - allowed
    if extra:
        raise ValueError(f"{name}: unknown config keys {sorted(extra)}")
    return cfg


def _angle(x) -> float:
    """Angles may be given as numbers or as strings like "pi/3" or "2*pi/3"."""
    if isinstance(x, str):
        expr = x.replace(" ", "")
        if not set(expr) <= set("0123456789.*/+-pi"):
            raise ValueError(f"bad angle expression {x!r}")
        return float(eval(expr, {"__builtins__": {}}, {"pi": math.pi}))  # noqa: S307 - restricted charset
    return float(x)


def _cplx(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(x[0], x[1])
    return complex(x)


# ---------------------------------------------------------------------------


def ratio_limit(cfg: dict, seed: int) -> Outcome:
    _take(cfg, {"theta1", "theta2", "eps1", "eps2", "alpha", "approach", "r0", "q", "n", "threshold"}, "ratio-limit")
    seq = cones.BoundarySequence(r0=float(cfg.get("r0", 1.0)), q=float(cfg.get("q", 0.5)), n=int(cfg.get("n", 40)),
                                 alpha=_angle(cfg.get("alpha", 0.0)), approach=cfg.get("approach", "constant"))
    rc = cones.RatioExperimentConfig(_angle(cfg.get("theta1", "pi/3")), _angle(cfg.get("theta2", "2*pi/3")),
                                     float(cfg.get("eps1", 1.0)), float(cfg.get("eps2", 1.0)), seq)
    rep = cones.ratio_experiment(rc, threshold=float(cfg.get("threshold", 1e-3)))
    header = ["j", "r", "alpha", "m1", "m2", "ratio"]
    return Outcome(rep.summary(), bool(rep.passed), {"ratio": (header, [[row[k] for k in header] for row in rep.rows])})


def cone_density(cfg: dict, seed: int) -> Outcome:
    _take(cfg, {"theta", "eps", "n_r", "n_phi", "dilation", "asymptotic_ratio"}, "cone-density")
    theta = _angle(cfg.get("theta", "pi/2"))
    eps = float(cfg.get("eps", 1.0))
    n_r, n_phi = int(cfg.get("n_r", 20)), int(cfg.get("n_phi", 20))
    s = float(cfg.get("dilation", 2.5))
    r = eps * np.linspace(0.05, 0.95, n_r)
    phi = theta * np.linspace(-0.95, 0.95, n_phi)
    R, PHI = np.meshgrid(r, phi, indexing="ij")
    cd = cones.cone_density_closed_form(theta, eps, R, PHI)
    scaled = cones.cone_density_closed_form(theta, s * eps, s * R, PHI)
    dil = float(np.max(np.abs(scaled.pullback_value * s ** 2 - cd.pullback_value) / cd.pullback_value))
    rr = eps * float(cfg.get("asymptotic_ratio", 1e-8))
    c = np.cos(math.pi * phi / (2 * theta))
    asym = cones.cone_density_closed_form(theta, eps, np.full_like(phi, rr), phi).pullback_value
    asym_err = float(np.max(np.abs(asym * rr ** 2 * 16 * theta ** 2 * c ** 2 / math.pi ** 2 - 1)))
    disc = cd.relative_discrepancy
    rows = [[a, b, p, q, d] for a, b, p, q, d in zip(R.ravel(), PHI.ravel(), cd.paper_expression.ravel(),
                                                      cd.pullback_value.ravel(), disc.ravel())]
    four_r = float(np.max(np.abs(cd.paper_expression / cd.pullback_value - 4 * R)))
    summary = {"max_relative_discrepancy": float(np.max(disc)), "min_relative_discrepancy": float(np.min(disc)),
               "printed_over_pullback_minus_4r": four_r, "dilation_error": dil, "sector_asymptotic_error": asym_err}
    return Outcome(summary, dil < 1e-10 and asym_err < 1e-4,
                   {"density": (["r", "phi", "paper_expression", "pullback_value", "relative_discrepancy"], rows)})


def _domain(spec) -> ProductDomain:
    if spec in (None, "bidisc"):
        return ProductDomain.polydisc(2)
    if spec == "disc":
        return ProductDomain.polydisc(1)
    return ProductDomain.from_json(spec)


def oracle_compare(cfg: dict, seed: int) -> Outcome:
    _take(cfg, {"domain", "point", "optimizer", "tolerance"}, "oracle-compare")
    dom = _domain(cfg.get("domain"))
    z = tuple(_cplx(x) for x in cfg.get("point", [[0, 0]] * dom.dim))
    opt = dict(cfg.get("optimizer", {}))
    opt.setdefault("seed", seed)
    oc = OptimizerConfig.from_json(opt)
    tol = float(cfg.get("tolerance", 0.02))
    lo = caratheodory_lower_oracle(dom, z, oc)
    up = eisenman_upper_oracle(dom, z, oc)
    e = eisenman_measure(dom, z)
    c = caratheodory_measure(dom, z, oc)
    slack = 1e-8 * max(1.0, e)
    sandwich = lo.bound <= c.value + slack and (c.value <= e + slack) and up.bound >= e - slack
    close = (not c.exact) or (lo.bound >= (1 - tol) * c.value and up.bound <= (1 + tol) * e)
    summary = {"lower": lo.bound, "caratheodory": c.value, "caratheodory_exact": c.exact, "eisenman": e,
               "upper": up.bound, "lower_ratio": lo.bound / c.value if c.value else None,
               "upper_ratio": up.bound / e, "lower_margin": lo.margin, "upper_margin": up.margin,
               "lower_history": lo.history, "upper_history": up.history,
               "sandwich": sandwich, "within_tolerance": close, "optimizer": oc.to_json()}
    return Outcome(summary, bool(sandwich and close))


def product_sandwich(cfg: dict, seed: int) -> Outcome:
    d = dict(cfg)
    pc = cones.ProductSandwichConfig.from_json(d)
    rep = cones.product_sandwich_experiment(pc)
    summary = rep.summary()
    passed = bool(rep.passed)
    header = ["m", "theta1", "theta2", "eps", "estimate", "last", "limit_prediction"]
    if pc.variant == "disc_cone":
        # the disc factor must cancel: compare against the bare cone ratio
        diffs = []
        for row in rep.rows:
            w = (row["eps"] * pc.sequence.radii()[-1]) * np.exp(1j * (math.pi + pc.sequence.angles()[-1]))
            inner = PlanarDomain.truncated_cone(row["theta1"], row["eps"] / pc.scale)
            outer = PlanarDomain.truncated_cone(row["theta2"], row["eps"] * pc.scale)
            cone_only = (poincare_density(outer, w) / poincare_density(inner, w)) ** 2
            diffs.append(abs(row["last"] - cone_only))
        summary["cone_only_max_difference"] = float(max(diffs))
        summary["cone_only_match"] = bool(max(diffs) < 1e-6)
    return Outcome(summary, passed, {"schedule": (header, [[row[k] for k in header] for row in rep.rows])})


def _defining(cfg: dict):
    spec = cfg.get("defining", {"catalog": "re_w_minus_z2"})
    return df_from_json(spec) if isinstance(spec, dict) else catalog(spec)


def foliation_trace(cfg: dict, seed: int) -> Outcome:
    _take(cfg, {"defining", "start", "path", "steps", "tol", "expect_closed"}, "foliation-trace")
    rho = _defining(cfg)
    start = [_cplx(x) for x in cfg.get("start", [[1, 0], [1, 0]])]
    p = cfg.get("path", {"circle": {"center": [0, 0], "radius": 1.0}})
    if "circle" in p:
        path = LeafPath.circle(_cplx(p["circle"].get("center", [0, 0])), float(p["circle"].get("radius", 1.0)))
    else:
        path = LeafPath.polyline([_cplx(v) for v in p["polyline"]])
    tr = trace_leaf(rho, start, path, steps=int(cfg.get("steps", 400)), tol=float(cfg.get("tol", 1e-8)))
    expect = cfg.get("expect_closed")
    ok = not tr.failed
    if expect is not None and tr.loop_defect is not None:
        ok = ok and ((tr.loop_defect < 1e-8) == bool(expect))
    rows = [[z.real, z.imag, w.real, w.imag, r] for z, w, r in zip(tr.zeta, tr.w, tr.residuals)]
    summary = {"defining": rho.name, "loop_defect": tr.loop_defect, "max_residual": tr.max_residual,
               "failed": tr.failed, "end": [tr.w[-1].real, tr.w[-1].imag]}
    return Outcome(summary, ok, {"trace": (["re_zeta", "im_zeta", "re_w", "im_w", "residual"], rows)})


def normalize(cfg: dict, seed: int) -> Outcome:
    _take(cfg, {"defining", "radius", "n_circles", "n_angles"}, "df-normalize")
    rho = _defining({"defining": cfg.get("defining", {"catalog": "re_w_exp_im_z"})})
    res = df_normalize(rho, radius=float(cfg.get("radius", 0.9)), n_circles=int(cfg.get("n_circles", 8)),
                       n_angles=int(cfg.get("n_angles", 64)))
    rows = [[z.real, z.imag, v, u, h.real, h.imag]
            for z, v, u, h in zip(res.z.ravel(), res.v.ravel(), res.u.ravel(), res.h.ravel())]
    summary = {"defining": rho.name, "spread": res.spread, "harmonic_residual": res.harmonic_residual,
               "series_head": [[c.real, c.imag] for c in res.series[:4]]}
    return Outcome(summary, res.spread < 1e-8,
                   {"grid": (["re_z", "im_z", "v", "u", "re_h", "im_h"], rows)})


def peak(cfg: dict, seed: int) -> Outcome:
    _take(cfg, {"delta", "r0", "n_radii", "n_angles"}, "peak-check")
    rep = peak_check(float(cfg.get("delta", 0.1)), r0=float(cfg.get("r0", 1.0)),
                     n_radii=int(cfg.get("n_radii", 14)), n_angles=int(cfg.get("n_angles", 14)))
    summary = {"value_at_origin": rep.value_at_origin, "delta": rep.delta, "max_outside": rep.max_outside,
               "margin": rep.margin, "interior_max": rep.interior_max, "samples": rep.samples,
               "far_samples": rep.far_samples}
    return Outcome(summary, rep.value_at_origin == 1.0 and rep.margin > 0 and rep.interior_max < 1)


def annulus_gap(cfg: dict, seed: int) -> Outcome:
    _take(cfg, {"inner", "outer", "disc_point", "optimizer"}, "annulus-gap")
    a, b = float(cfg.get("inner", 1.0)), float(cfg.get("outer", 4.0))
    dom = ProductDomain.of(PlanarDomain.unit_disc(), PlanarDomain.annulus(a, b))
    z = (_cplx(cfg.get("disc_point", 0.0)), complex(math.sqrt(a * b)))
    opt = dict(cfg.get("optimizer", {}))
    opt.setdefault("seed", seed)
    oc = OptimizerConfig.from_json(opt)
    mv = measure_ratio(dom, z, oc)
    summary = {"caratheodory_lower": mv.caratheodory, "eisenman": mv.eisenman, "ratio": mv.ratio,
               "gap": 1.0 - mv.ratio, "method": mv.method, "optimizer": oc.to_json()}
    return Outcome(summary, mv.ratio < 1.0)


EXPERIMENTS: dict[str, tuple[Callable[[dict, int], Outcome], str]] = {
    "ratio-limit": (ratio_limit, "cone measure ratio along a boundary sequence vs. the limit formula"),
    "cone-density": (cone_density, "printed cone density vs. chart pullback on an (r, phi) grid"),
    "oracle-compare": (oracle_compare, "oracle lower/upper bounds vs. closed-form measures"),
    "product-sandwich": (product_sandwich, "C/E ratio of nested cone products over an angle schedule"),
    "foliation-trace": (foliation_trace, "trace a leaf of {rho = 0} along a path in the z-plane"),
    "df-normalize": (normalize, "normalize the boundary normal along the leaf w = 0"),
    "peak-check": (peak, "peak function on the wedge"),
    "annulus-gap": (annulus_gap, "C/E gap on disc x annulus (observational)"),
}


def run_experiment(exp_id: str, cfg: dict, seed: int) -> Outcome:
    if exp_id not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {exp_id!r}; known: {sorted(EXPERIMENTS)}")
    try:
        return EXPERIMENTS[exp_id][0](dict(cfg), int(seed))
    except (ValueError, TypeError, KeyError) as exc:
        raise type(exc)(f"{exp_id}: {exc}") from exc
