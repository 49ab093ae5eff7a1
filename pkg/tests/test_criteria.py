"""Closed-form criteria, witnesses, and the building-block inequalities."""

import math

import numpy as np
import pytest

from conftest import make_mode, random_field
from rtspectra import criteria, modereduce as mr
from rtspectra.equilibrium import Geometry, PressureLaw, build_profile
from rtspectra.errors import (
    BadDirectionError,
    ConcentrationError,
    DegenerateModeError,
    FieldOrientationError,
)
from rtspectra.params import PhysicalParams


def test_vertical_threshold_canonical(canonical_profile):
    rep = criteria.vertical_field_threshold(canonical_profile, lam=1.0, M3=2.3)
    assert rep.threshold_value == pytest.approx(5.142471399669742, rel=1e-10)
    assert rep.actual_value == pytest.approx(2.3 ** 2)
    assert rep.sufficient_stability  # 5.29 > 5.14
    rep2 = criteria.vertical_field_threshold(canonical_profile, lam=1.0, M3=2.2)
    assert not rep2.sufficient_stability


def test_vertical_threshold_zero_gravity(geometry):
    prof0 = build_profile(geometry, PressureLaw.linear(1.0), PressureLaw.linear(2.0), 0.0, 2.0)
    rep = criteria.vertical_field_threshold(prof0, lam=1.0)
    # gravity term vanishes: threshold reduces to P_inf / lam
    assert rep.threshold_value == pytest.approx(rep.inputs["p_inf"], rel=1e-12)


def test_vertical_threshold_lam_scaling(canonical_profile):
    r1 = criteria.vertical_field_threshold(canonical_profile, lam=1.0)
    r2 = criteria.vertical_field_threshold(canonical_profile, lam=2.0)
    assert r2.threshold_value == pytest.approx(r1.threshold_value / 2.0, rel=1e-12)


def test_viscoelastic_threshold_canonical(canonical_profile):
    rep = criteria.viscoelastic_threshold(canonical_profile, 0.6, 0.7)
    assert rep.threshold_value == pytest.approx(0.5, rel=1e-12)
    assert rep.actual_value == 0.6
    assert rep.sufficient_stability


def test_viscoelastic_threshold_tall_layers():
    geo = Geometry(h_minus=-2.0, h_plus=2.0, L1=1.0, L2=1.0)
    prof = build_profile(geo, PressureLaw.linear(1.0), PressureLaw.linear(2.0), 1.0, 2.0)
    rep = criteria.viscoelastic_threshold(prof, 1.0, 1.0)
    # g*[[rho]]*(2)(-2)/(-4) = g*[[rho]]
    assert rep.threshold_value == pytest.approx(prof.g * prof.density_jump, rel=1e-12)


def test_viscoelastic_threshold_negative_jump(geometry):
    prof = build_profile(geometry, PressureLaw.linear(2.0), PressureLaw.linear(1.0), 1.0, 1.0)
    rep = criteria.viscoelastic_threshold(prof, 0.0, 0.0)
    assert rep.threshold_value <= 0.0
    assert rep.sufficient_stability  # any kappa >= 0 clears a nonpositive threshold
    assert not criteria.viscoelastic_threshold(prof, -0.0, 0.0).threshold_value > 0


def test_horizontal_witness_agreement(canonical_profile):
    geo = canonical_profile.geometry
    params = PhysicalParams(lam=1.0, M=(1.0, 0.0, 0.0))
    mode = make_mode(1, 1, geo)
    w = criteria.horizontal_field_witness(canonical_profile, params, mode)
    assert abs(w.energy_value - w.closed_form_value) \
        <= 1e-8 * max(1.0, abs(w.closed_form_value))


def test_horizontal_witness_zero_field_positive(canonical_profile):
    params = PhysicalParams(lam=1.0, M=(0.0, 0.0, 0.0))
    mode = make_mode(1, 1, canonical_profile.geometry)
    w = criteria.horizontal_field_witness(canonical_profile, params, mode)
    jump_term = canonical_profile.g * canonical_profile.density_jump
    assert w.closed_form_value == pytest.approx(jump_term, rel=1e-12)
    assert w.closed_form_value > 0


def test_horizontal_witness_errors(canonical_profile):
    geo = canonical_profile.geometry
    with pytest.raises(DegenerateModeError):
        criteria.horizontal_field_witness(canonical_profile,
                                          PhysicalParams(M=(1.0, 0.0, 0.0)),
                                          make_mode(0, 1, geo))
    with pytest.raises(FieldOrientationError):
        criteria.horizontal_field_witness(canonical_profile,
                                          PhysicalParams(M=(1.0, 0.0, 0.5)),
                                          make_mode(1, 0, geo))


def test_horizontal_period_bisection(canonical_profile):
    params = PhysicalParams(lam=1.0, M=(1.0, 0.0, 0.0))
    L1_star = criteria.horizontal_period_threshold(canonical_profile, params, 1, 1)
    geo = canonical_profile.geometry

    def value(L1):
        mode = mr.FourierMode(k1=1, k2=1, xi1=1.0 / L1, xi2=1.0 / geo.L2)
        return criteria.closed_form_horizontal(
            canonical_profile, params, mode,
            criteria.default_bump(geo), criteria._default_bump_derivative(geo))

    assert value(1.02 * L1_star) > 0
    assert value(0.98 * L1_star) < 0


def test_small_field_witness_canonical(canonical_profile):
    params = PhysicalParams(mu_plus=0.1, mu_minus=0.1, lam=1.0, M=(0.0, 0.0, 0.02))
    w = criteria.small_field_witness(canonical_profile, params, 0.1)
    assert w.energy_value > 0
    assert abs(w.energy_value - w.closed_form_value) <= 1e-10 * max(1.0, abs(w.closed_form_value))
    # the integration-by-parts identity behind the construction
    assert w.diagnostics["jump_integral"] == pytest.approx(w.diagnostics["identity_rhs"],
                                                           rel=1e-10)
    assert canonical_profile.g * w.diagnostics["jump_integral"] < 0


def test_small_field_sign_persistence(canonical_profile):
    """E1+E2 > 0 persists as M -> 0: the magnetic correction decays like |M|^2.

    The tent witness has a distributional horizontal derivative, so the
    discrete magnetic constant is grid-resolution-sized; only the scaling
    in |M|^2 and the small-field sign are mode-independent facts.
    """
    values = []
    for m3 in (0.0, 1e-12, 3e-12):
        params = PhysicalParams(mu_plus=0.1, mu_minus=0.1, lam=1.0, M=(0.0, 0.0, m3))
        w = criteria.small_field_witness(canonical_profile, params, 0.1)
        values.append(w.diagnostics["full_energy"])
    assert all(v > 0 for v in values)
    gaps = [abs(v - values[0]) for v in values[1:]]
    assert gaps[1] == pytest.approx(9.0 * gaps[0], rel=1e-3)


def test_small_field_witness_no_jump(geometry):
    prof = build_profile(geometry, PressureLaw.linear(1.5), PressureLaw.linear(1.5), 1.0, 2.0)
    with pytest.raises(ConcentrationError):
        criteria.small_field_witness(prof, PhysicalParams(), 0.1)


def test_small_field_identity_sign_analysis(geometry):
    """With zero jump and rho' < 0 the integral is positive for every width."""
    prof = build_profile(geometry, PressureLaw.linear(1.5), PressureLaw.linear(1.5), 1.0, 2.0)
    for eps in (0.4, 0.2, 0.1, 0.05):
        assert criteria._jump_integral(prof, eps) > 0


def test_poincare_sharp_constant(geometry):
    grid = np.unique(np.concatenate([np.linspace(-1, 1, 801), [0.0]]))
    phi = np.sin(np.pi * (grid - grid[0]) / geometry.height).astype(complex)
    phi[0] = phi[-1] = 0
    mode = make_mode(0, 0, geometry)
    lhs, rhs, holds = criteria.poincare_check(phi, grid, mode, (0.0, 0.0, 1.0), geometry)
    assert holds
    assert lhs / rhs >= 0.999


def test_poincare_random_fields(geometry, rng):
    grid = np.unique(np.concatenate([np.linspace(-1, 1, 201), [0.0]]))
    mode = make_mode(2, 1, geometry)
    for _ in range(200):
        phi = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
        phi[0] = phi[-1] = 0
        nu = (rng.uniform(-2, 2), rng.uniform(-2, 2), 1.0)
        lhs, rhs, holds = criteria.poincare_check(phi, grid, mode, nu, geometry)
        assert holds
    lhs, rhs, holds = criteria.poincare_check(np.zeros(grid.size), grid, mode,
                                              (0.0, 0.0, 1.0), geometry)
    assert holds and lhs == 0.0


def test_trace_constant_and_random_fields(geometry, rng):
    grid = np.unique(np.concatenate([np.linspace(-1, 1, 201), [0.0]]))
    mode = make_mode(1, 2, geometry)
    const = math.sqrt(geometry.h_minus * geometry.h_plus
                      / (geometry.h_minus - geometry.h_plus))
    assert const == pytest.approx(math.sqrt(0.5), rel=1e-14)
    for _ in range(200):
        f = random_field(grid, rng)
        nu = (rng.uniform(-2, 2), rng.uniform(-2, 2), 1.0)
        lhs, rhs, holds = criteria.trace_check(f, mode, nu, geometry)
        assert holds
    zero = mr.ModeField(grid, np.zeros((grid.size, 3), dtype=complex))
    lhs, rhs, holds = criteria.trace_check(zero, mode, (0.0, 0.0, 1.0), geometry)
    assert holds and lhs == 0.0


def test_bad_direction(geometry, rng):
    grid = np.unique(np.concatenate([np.linspace(-1, 1, 51), [0.0]]))
    phi = np.zeros(grid.size)
    with pytest.raises(BadDirectionError):
        criteria.poincare_check(phi, grid, make_mode(1, 0, geometry), (0.0, 0.0, 2.0), geometry)
    with pytest.raises(BadDirectionError):
        criteria.trace_check(random_field(grid, rng), make_mode(1, 0, geometry),
                             (0.0, 1.0, 0.5), geometry)
