import math

import numpy as np
import pytest

from invlab.planar import (AnnulusCovering, Mobius, PlanarDomain, cayley_to_disc, chart_for, cone_chart,
                           contains, poincare_density, sector_chart)


def test_membership_examples():
    m = contains(PlanarDomain.unit_disc(), 0)
    assert m.inside and m.margin == pytest.approx(1.0)
    assert contains(PlanarDomain.truncated_cone(math.pi / 2, 1.0), -0.5).inside
    assert not contains(PlanarDomain.truncated_cone(math.pi / 4, 1.0), 0.5).inside


def test_membership_agrees_with_definition():
    rng = np.random.default_rng(1)
    z = rng.uniform(-1.2, 1.2, 10_000) + 1j * rng.uniform(-1.2, 1.2, 10_000)
    theta, eps = 1.1, 0.9
    dom = PlanarDomain.truncated_cone(theta, eps)
    expected = (np.abs(np.angle(-z)) < theta) & (np.abs(z) < eps)
    assert np.array_equal(dom.margin(z) > 0, expected)


def test_invalid_domains():
    with pytest.raises(ValueError):
        PlanarDomain.truncated_cone(math.pi, 1.0)
    with pytest.raises(ValueError):
        PlanarDomain.annulus(2.0, 1.0)


def test_density_anchors():
    assert poincare_density(PlanarDomain.unit_disc(), 0) == pytest.approx(1.0, abs=1e-15)
    assert poincare_density(PlanarDomain.unit_disc(), 0.5) == pytest.approx(4 / 3, rel=1e-14)
    assert poincare_density(PlanarDomain.upper_half_plane(), 1j) == pytest.approx(0.5, rel=1e-14)
    assert poincare_density(PlanarDomain.disc(1 + 1j, 2.0), 1 + 1j) == pytest.approx(0.5, rel=1e-14)


def test_cone_golden_value():
    # the quarter-turn t = -iz sends the left half-disc onto the upper half-disc,
    # and J(t) = -(t + 1/t)/2 maps that onto the upper half-plane
    r = 0.3
    golden = (1 + r * r) / (2 * r * (1 - r * r))
    assert golden == pytest.approx(1.996337, abs=1e-6)
    lam = poincare_density(PlanarDomain.truncated_cone(math.pi / 2, 1.0), -r)
    assert lam == pytest.approx(golden, rel=1e-13)


def test_cone_golden_value_mpmath():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    theta, eps, z = mp.pi / 3, mp.mpf(1), mp.mpc(-0.4, 0.1)
    k = mp.pi / (2 * theta)

    def g(x):
        w1 = mp.power(-x / eps, k)
        return ((1 + 1j * w1) / (1 - 1j * w1)) ** 2

    lam = abs(mp.diff(g, z)) / (2 * mp.im(g(z)))
    got = poincare_density(PlanarDomain.truncated_cone(math.pi / 3, 1.0), complex(z))
    assert got == pytest.approx(float(lam), rel=1e-12)


def test_cone_chart_roundtrip_and_axis_limit():
    ch = cone_chart(1.0, 0.7)
    rng = np.random.default_rng(2)
    z = PlanarDomain.truncated_cone(1.0, 0.7).sample_interior(200, rng)
    assert np.all(ch(z).imag > 0)
    assert np.max(np.abs(ch.inverse(ch(z)) - z)) < 1e-11
    assert abs(ch(-1e-12) - 1) < 1e-6


def test_chart_derivative_matches_difference_quotient():
    for ch, z in ((cone_chart(0.8, 2.0), -0.7 + 0.2j), (sector_chart(2.0), 1j), (cayley_to_disc(), 0.3 + 2j)):
        h = 1e-6
        fd = (ch(z + h) - ch(z - h)) / (2 * h)
        assert abs(fd - ch.derivative(z)) < 1e-7 * max(1, abs(fd))


def test_vertex_blow_up_rate():
    dom = PlanarDomain.truncated_cone(math.pi / 3, 1.0)
    vals = [poincare_density(dom, -r) * r for r in np.geomspace(1e-8, 1e-2, 7)]
    assert 0 < min(vals) and max(vals) < 10


def test_mobius_invariance():
    rng = np.random.default_rng(3)
    disc = PlanarDomain.unit_disc()
    for _ in range(50):
        a = 0.9 * rng.uniform() * np.exp(2j * math.pi * rng.uniform())
        f = Mobius(a, np.exp(1j * rng.uniform(0, 6)))
        z = disc.sample_interior(1, rng)[0]
        lhs = poincare_density(disc, z)
        rhs = poincare_density(disc, complex(f(z))) * abs(f.derivative(z))
        assert lhs == pytest.approx(rhs, rel=1e-10)
        assert abs(f.inverse()(f(z)) - z) < 1e-12


def test_annulus_covering():
    cov = AnnulusCovering(1.0, 4.0)
    rng = np.random.default_rng(4)
    z = cov.domain.sample_interior(100, rng)
    for sheet in (0, 1, -2):
        w = cov.preimage(z, sheet)
        assert np.all(w.imag > 0)
        assert np.max(np.abs(cov(w) - z)) < 1e-12
    assert np.max(np.abs(cov.density(z, 0) - cov.density(z, 3)) / cov.density(z, 0)) < 1e-9
    # density depends on |z| only
    assert cov.density(2.0) == pytest.approx(cov.density(2.0j), rel=1e-12)


def test_annulus_density_minimum():
    # |z| * lambda(|z|) is smallest on the core circle |z| = sqrt(ab); lambda itself is not
    dom = PlanarDomain.annulus(1.0, 4.0)
    r = np.linspace(1.05, 3.95, 2901)
    lam = poincare_density(dom, r + 0j)
    assert r[np.argmin(r * lam)] == pytest.approx(2.0, abs=2e-3)
    assert r[np.argmin(lam)] > 2.2


def test_chart_for_rejects_annulus():
    with pytest.raises(ValueError):
        chart_for(PlanarDomain.annulus(1.0, 2.0))


def test_density_outside_raises():
    with pytest.raises(ValueError):
        poincare_density(PlanarDomain.unit_disc(), 1.5)


def test_cone_density_matches_chart_pullback():
    rng = np.random.default_rng(7)
    for theta, eps in ((0.4, 1.0), (1.5, 0.3), (2.8, 2.0)):
        dom = PlanarDomain.truncated_cone(theta, eps)
        z = dom.sample_interior(50, rng)
        a, b = poincare_density(dom, z), cone_chart(theta, eps).density(z)
        assert np.max(np.abs(a - b) / b) < 1e-10


def test_narrow_cone_density_is_finite():
    # (-z/eps)^(pi/2theta) underflows here; the density must not
    theta, eps = 0.0055, 0.05
    dom = PlanarDomain.truncated_cone(theta, eps)
    lam = poincare_density(dom, -0.0034 + 0j)
    k = math.pi / (2 * theta)
    assert lam == pytest.approx(k / (2 * 0.0034), rel=1e-12)


def test_thin_annulus_density():
    cov = AnnulusCovering(1.0, 1.001)
    z = 1.0005j
    with pytest.raises(ValueError):
        cov.density(z, 0)
    # the core circle of a thin annulus looks like a strip of width L
    L = cov.log_modulus
    assert poincare_density(cov.domain, z) == pytest.approx(math.pi / (2 * L * abs(z)), rel=1e-6)
