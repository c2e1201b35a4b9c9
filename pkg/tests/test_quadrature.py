import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bphi_lab.quadrature import (
    QuadratureError,
    QuadratureSpec,
    integrate_circle,
    integrate_disk,
    integrate_interval,
    search_radii,
    sup_search,
)


def poisson(z):
    return lambda zeta: (1 - abs(z) ** 2) / np.abs(1 - zeta * z) ** 2


def test_circle_examples():
    assert integrate_circle(lambda z: np.ones(z.shape), 7) == 1.0
    assert abs(integrate_circle(lambda z: z**3, 64)) < 1e-14
    assert abs(integrate_circle(poisson(0.7 + 0.1j), 256) - 1) < 1e-10


@settings(max_examples=50, deadline=None)
@given(k=st.integers(-40, 40), n=st.sampled_from([64, 128, 256]))
def test_circle_exact_on_trig_polynomials(k, n):
    expected = 1.0 if k == 0 else 0.0
    assert abs(integrate_circle(lambda z: z**k, n) - expected) < 1e-13


def test_poisson_identity_random_points():
    rng = np.random.default_rng(2024)
    rad = 0.9 * np.sqrt(rng.random(50))
    for z in rad * np.exp(2j * np.pi * rng.random(50)):
        assert abs(integrate_circle(poisson(z), 512) - 1) <= 1e-9


def test_circle_rejects_non_finite():
    with pytest.raises(QuadratureError):
        with np.errstate(divide="ignore", invalid="ignore"):
            integrate_circle(lambda z: 1 / (1 - z), 16)


@pytest.mark.parametrize("rule", ["gauss-legendre", "midpoint"])
def test_disk_examples(rule):
    spec = QuadratureSpec(radial_rule=rule)
    tol = 1e-12 if rule == "gauss-legendre" else 1e-4
    assert integrate_disk(lambda z: np.ones(z.shape), spec) == pytest.approx(1, abs=1e-14)
    assert abs(integrate_disk(lambda z: np.abs(z) ** 2, spec) - 0.5) <= tol
    assert abs(integrate_disk(lambda z: 1 - np.abs(z) ** 2, spec) - 0.5) <= tol


def test_integrate_interval():
    assert integrate_interval(np.exp, 0.0, 1.0) == pytest.approx(math.e - 1, rel=1e-14)


def test_sup_interior_max():
    res = sup_search(lambda z: 1 - np.abs(z) ** 2)
    assert res.value == 1.0
    assert res.argpoint == 0


def test_sup_radial_approach():
    spec = QuadratureSpec(delta=1e-6)
    res = sup_search(lambda z: (1 - np.abs(z) ** 2) / np.abs(1 - z), spec)
    assert res.value >= 1.999
    assert res.argpoint.real > 0.999
    assert abs(res.argpoint.imag) < 1e-3
    assert res.meta["on_cutoff"]


def test_sup_constant_goes_to_first_node():
    res = sup_search(lambda z: np.full(z.shape, 0.7))
    assert res.value == 0.7
    assert res.argpoint == 0
    assert res.meta["evaluations"] > 0


@settings(max_examples=25, deadline=None)
@given(c=st.complex_numbers(max_magnitude=0.9), width=st.floats(0.05, 1.0))
def test_sup_value_matches_objective_at_argpoint(c, width):
    def bump(z):
        return np.exp(-np.abs(z - c) ** 2 / width)

    res = sup_search(bump, QuadratureSpec(n_theta=32, n_rho=32))
    assert abs(res.value - float(bump(np.array(res.argpoint)))) <= 1e-12
    assert abs(res.argpoint) <= 1 - QuadratureSpec().delta + 1e-15


def test_sup_refinement_is_monotone():
    def f(z):
        return -np.abs(z - (0.3137 + 0.2718j)) ** 2

    values = [sup_search(f, QuadratureSpec(n_theta=16, n_rho=16, refine=k)).value for k in range(5)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] > -1e-4


def test_sup_rejects_non_finite():
    with pytest.raises(QuadratureError):
        sup_search(lambda z: np.where(np.abs(z) > 0.5, np.nan, 0.0))


def test_search_radii_reach_cutoff():
    spec = QuadratureSpec(delta=1e-4)
    radii = search_radii(spec)
    assert radii[0] == 0.0
    assert radii[-1] == pytest.approx(1 - 1e-4, abs=1e-15)
    assert np.all(np.diff(radii) > 0)
    assert np.min(1 - radii[radii > 0.99]) < 2e-4


def test_spec_json_roundtrip():
    spec = QuadratureSpec(n_theta=64, n_rho=32, radial_rule="midpoint", delta=1e-5, refine=1)
    assert QuadratureSpec.from_json(spec.to_json()) == spec
    assert json.loads(spec.to_json())["delta"] == 1e-5


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_theta=2), dict(n_rho=1), dict(radial_rule="simpson"), dict(delta=0.0), dict(delta=0.7), dict(refine=-1)],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureSpec(**kwargs)
