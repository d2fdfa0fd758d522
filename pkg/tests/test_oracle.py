import csv
import json
import math

import numpy as np
import pytest

from invlab.metrics import ProductDomain, eisenman_measure
from invlab.oracle import (DiscCandidate, OptimizerConfig, append_ledger, caratheodory_lower_oracle,
                           eisenman_upper_oracle, feasibility_margin, kobayashi_upper_oracle, result_json)
from invlab.planar import Mobius, PlanarDomain, cone_chart, cayley_to_disc, poincare_density

DISC = ProductDomain.polydisc(1)
BIDISC = ProductDomain.polydisc(2)
FAST = OptimizerConfig(degree=3, restarts=2)


def test_identity_disc_is_exact():
    res = kobayashi_upper_oracle(DISC, (0,), (1,), FAST)
    assert res.bound == pytest.approx(1.0, abs=1e-9)
    assert res.direction == "upper" and res.margin >= 0


def test_bidisc_origin_bounds():
    up = eisenman_upper_oracle(BIDISC, (0, 0), FAST)
    lo = caratheodory_lower_oracle(BIDISC, (0, 0), FAST)
    assert lo.bound <= 1.0 + 1e-9 <= up.bound + 2e-9
    assert up.bound == pytest.approx(1.0, abs=1e-9)
    assert lo.bound == pytest.approx(1.0, abs=1e-9)


def test_kobayashi_product_point():
    res = kobayashi_upper_oracle(BIDISC, (0, 0), (1, 0), FAST)
    assert res.bound == pytest.approx(1.0, abs=1e-9)


def test_determinism():
    cfg = OptimizerConfig(degree=3, restarts=3, seed=7)
    a = eisenman_upper_oracle(DISC, (0.4 + 0.1j,), cfg)
    b = eisenman_upper_oracle(DISC, (0.4 + 0.1j,), OptimizerConfig(degree=3, restarts=3, seed=7))
    assert a.bound == b.bound and a.history == b.history
    assert result_json(a) == result_json(b)


def test_degree_ladder_is_monotone():
    res = kobayashi_upper_oracle(DISC, (0.5,), (1,), OptimizerConfig(degree=6, restarts=2))
    h = res.history
    assert all(b <= a + 1e-12 for a, b in zip(h, h[1:]))
    assert h[1] == pytest.approx(2.0, rel=1e-9)  # best affine disc through 1/2
    assert 4 / 3 <= res.bound < 1.36


def test_restarts_never_hurt():
    few = eisenman_upper_oracle(DISC, (0.5j,), OptimizerConfig(degree=4, restarts=1))
    many = eisenman_upper_oracle(DISC, (0.5j,), OptimizerConfig(degree=4, restarts=4))
    assert many.bound <= few.bound + 1e-12


def test_caratheodory_lower_is_below_closed_form():
    z = (0.3 + 0.2j, 0.5)
    lo = caratheodory_lower_oracle(BIDISC, z, FAST)
    assert 0 < lo.bound <= eisenman_measure(BIDISC, z) * (1 + 1e-9)


def test_cone_kobayashi_high_degree():
    cone = PlanarDomain.truncated_cone(math.pi / 3, 1.0)
    res = kobayashi_upper_oracle(ProductDomain.of(cone), (-0.2,), (1,), OptimizerConfig(degree=12, restarts=4, max_evals=100))
    exact = poincare_density(cone, -0.2)
    assert exact <= res.bound <= 1.02 * exact


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="degree-6 polynomial discs resolve the cone vertex singularity only to ~20% "
                                       "in the squared product measure")
def test_cone_product_eisenman_degree6():
    cone = PlanarDomain.truncated_cone(math.pi / 3, 1.0)
    dom = ProductDomain.of(cone, cone)
    res = eisenman_upper_oracle(dom, (-0.2, -0.2), OptimizerConfig(degree=6, restarts=8))
    assert res.bound <= 1.02 * eisenman_measure(dom, (-0.2, -0.2))


def test_annulus_upper_bound_above_exact():
    dom = ProductDomain.of(PlanarDomain.unit_disc(), PlanarDomain.annulus(1.0, 4.0))
    z = (0.1, 2.0)
    res = eisenman_upper_oracle(dom, z, FAST)
    assert res.bound >= eisenman_measure(dom, z) * (1 - 1e-9)


def test_feasibility_margin_examples():
    ident = DiscCandidate("disc", (np.array([0, 1], complex),))
    assert feasibility_margin(ident, DISC, 1000) == pytest.approx(0.0, abs=1e-12)
    shrunk = DiscCandidate("disc", (np.array([0, 0.999], complex),))
    assert feasibility_margin(shrunk, DISC, 1000) > 0
    assert feasibility_margin(lambda s: 2 * s, DISC) < 0
    # inverse cone chart after a disc automorphism lands in the cone
    theta, eps = 1.0, 0.5
    ch = cone_chart(theta, eps).then(cayley_to_disc())
    mob = Mobius(0.3 - 0.2j)
    cone = ProductDomain.of(PlanarDomain.truncated_cone(theta, eps))
    assert feasibility_margin(lambda s: ch.inverse(0.999 * mob(s)), cone) >= 0


def test_invalid_inputs():
    with pytest.raises(ValueError):
        OptimizerConfig(degree=0)
    with pytest.raises(ValueError):
        kobayashi_upper_oracle(DISC, (0,), (0,), FAST)
    with pytest.raises(ValueError):
        eisenman_upper_oracle(DISC, (1.5,), FAST)


def test_config_json_roundtrip():
    cfg = OptimizerConfig(degree=5, restarts=3, penalties=(10.0, 100.0), seed=4)
    assert OptimizerConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg


def test_ledger(tmp_path):
    path = tmp_path / "ledger.csv"
    for z in (0.1, 0.2):
        append_ledger(path, eisenman_upper_oracle(DISC, (z,), FAST))
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["problem", "bound", "direction", "degree", "seed", "margin", "iterations"]
    assert len(rows) == 3 and rows[1][0] == "eisenman"
