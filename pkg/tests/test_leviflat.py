import math

import numpy as np
import pytest

from invlab.leviflat import (DefiningSystem, HarmonicityError, LeafPath, SurfaceSampler, catalog, complex_tangent,
                             df_normalize, from_callable, from_json, genericity_check, in_wedge, is_levi_flat,
                             levi_form, peak_check, peak_function, polynomial, project_to_surface, trace_leaf)


@pytest.mark.parametrize("name", ["re_w", "re_w_minus_z2", "sphere", "re_w_plus_01_abs_z2", "re_w_exp_im_z"])
def test_analytic_derivatives_match_finite_differences(name):
    assert catalog(name).cross_check(np.random.default_rng(0), n=10) < 1e-6


def test_callable_and_json_constructors():
    rho = from_callable(lambda z, w: (w - z * z).real, name="cb")
    p = (0.3 + 0.1j, 0.2 - 0.4j)
    ref = catalog("re_w_minus_z2")
    assert np.allclose(rho.gradient(p), ref.gradient(p), atol=1e-8)
    poly = from_json({"polynomial": [[1, 0, 0, 0, 1, 0], [-1, 0, 2, 0, 0, 0]]})
    assert poly.value(p) == pytest.approx(ref.value(p))
    assert from_json(ref.to_json()).name == ref.name
    with pytest.raises(KeyError):
        catalog("nope")


def test_levi_form_examples():
    assert levi_form(catalog("re_w"), (0.3, 0.5j), X=(1, 0)).value == pytest.approx(0, abs=1e-12)
    sphere = catalog("sphere")
    val = levi_form(sphere, (1, 0), X=(0, 1))
    assert val.value == pytest.approx(1.0) and val.sign == "positive"
    rho = catalog("re_w_minus_z2")
    for z in (0.0, 0.5 + 0.5j, -1.2j):
        p = (z, z * z + 0.7j)
        assert levi_form(rho, p, X=(1, 2 * z)).sign == "zero"


def test_levi_form_rejects_bad_inputs():
    sphere = catalog("sphere")
    with pytest.raises(ValueError):
        levi_form(sphere, (0, 0))
    with pytest.raises(ValueError):
        levi_form(sphere, (1, 0), X=(1, 0))


def test_complex_tangent_is_tangent():
    rho = catalog("sphere")
    p = project_to_surface(rho, np.array([0.4 + 0.2j, 0.5 - 0.6j]))
    X = complex_tangent(rho, p)
    assert abs(np.dot(rho.gradient(p), X)) < 1e-12 and np.linalg.norm(X) == pytest.approx(1.0)


def test_flatness_verdicts():
    sampler = SurfaceSampler(n=60)
    assert is_levi_flat(catalog("re_w"), sampler).flat
    assert is_levi_flat(catalog("re_w_minus_z2"), sampler).flat
    v = is_levi_flat(catalog("sphere"), sampler)
    assert not v.flat and v.witness_value == pytest.approx(1.0, rel=1e-6)


def test_genericity():
    rep = genericity_check(DefiningSystem((catalog("re_w"), catalog("re_z"))), SurfaceSampler(n=40))
    inter = rep[-1]
    assert inter.stratum == (0, 1) and inter.generic
    assert inter.min_complex_wedge == pytest.approx(0.25, rel=1e-8)
    rep = genericity_check(DefiningSystem((catalog("re_w"), catalog("im_w_minus_abs_z2_plus_1"))),
                           SurfaceSampler(n=40))
    inter = rep[-1]
    assert not inter.generic and abs(inter.witness[0]) < 1e-8


def test_leaf_segment_reaches_origin():
    tr = trace_leaf(catalog("re_w_minus_z2"), (1, 1), LeafPath.polyline([1, 0]))
    assert abs(tr.w[-1]) < 1e-10
    assert np.max(np.abs(tr.w - tr.zeta ** 2)) < 1e-8 and not tr.failed


def test_horizontal_leaves():
    tr = trace_leaf(catalog("re_w"), (0, 0.7j), LeafPath.polyline([0, 1 + 1j, -0.5j]), steps=50)
    assert np.max(np.abs(tr.w - 0.7j)) < 1e-14


def test_loop_defects():
    flat = trace_leaf(catalog("re_w_minus_z2"), (1, 1), LeafPath.circle())
    assert flat.loop_defect < 1e-8
    bent = trace_leaf(catalog("re_w_plus_01_abs_z2"), (1, -0.1), LeafPath.circle())
    assert bent.loop_defect == pytest.approx(0.4 * math.pi, rel=1e-6)
    sphere = trace_leaf(catalog("sphere"), (0.5, -math.sqrt(0.75)), LeafPath.circle(0, 0.5))
    assert sphere.loop_defect == pytest.approx(1.5, rel=1e-3)


def test_trace_rejects_off_surface_start():
    with pytest.raises(ValueError):
        trace_leaf(catalog("re_w"), (0, 1), LeafPath.polyline([0, 1]))


def test_trace_csv(tmp_path):
    tr = trace_leaf(catalog("re_w_minus_z2"), (1, 1), LeafPath.polyline([1, 0]), steps=10)
    path = tmp_path / "leaf.csv"
    tr.to_csv(path)
    assert len(path.read_text().strip().splitlines()) == len(tr.zeta) + 1


def test_normalize_golden_case():
    res = df_normalize(catalog("re_w_exp_im_z"))
    assert np.max(np.abs(res.h - np.exp(-res.z))) < 1e-6
    assert np.max(np.abs(res.h_at(res.z) - np.exp(-res.z))) < 1e-6
    assert res.spread < 1e-8
    assert np.allclose(res.v, -res.z.imag, atol=1e-9) and np.allclose(res.u, res.z.real, atol=1e-9)


def test_normalize_is_idempotent_on_normal_form():
    res = df_normalize(catalog("re_w"))
    assert np.max(np.abs(res.h - 1)) < 1e-12 and res.spread < 1e-8
    again = df_normalize(df_normalize(catalog("re_w_exp_im_z")).transformed)
    assert np.max(np.abs(again.h - 1)) < 1e-9


def test_normalize_rejects_non_harmonic_phase():
    rho = from_callable(lambda z, w: (w * np.exp(1j * abs(z) ** 2)).real, name="bad")
    with pytest.raises(HarmonicityError):
        df_normalize(rho)


def test_normalize_requires_vanishing_on_leaf():
    with pytest.raises(ValueError):
        df_normalize(catalog("re_w_minus_z2"))


def test_peak_function_values():
    assert peak_function(np.array([0j]), np.array([0j]))[0] == 1.0
    assert abs(peak_function(np.array([-1 + 0j]), np.array([-1 + 0j]))[0]) == pytest.approx(math.exp(-2))
    t = np.geomspace(1e-6, 1, 50)
    f = np.abs(peak_function(-t + 0j, -t + 0j))
    assert np.max(np.abs(f - np.exp(-2 * t ** (2 / 3)))) < 1e-12
    assert np.all(np.diff(f) < 0)


def test_wedge():
    assert in_wedge(-1 + 0j) and in_wedge(0.5 + 1j) and not in_wedge(1 + 0j)


def test_peak_check():
    rep = peak_check(0.1)
    assert rep.value_at_origin == 1.0 and rep.margin > 0 and rep.far_samples >= 10_000
    with pytest.raises(ValueError):
        peak_check(0.1, samples=np.array([[1 + 0j, -1 + 0j]]))


def test_polynomial_validation():
    with pytest.raises(ValueError):
        polynomial([[1, 0, 1]])
