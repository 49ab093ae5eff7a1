"""Closed-form sufficient criteria and explicit instability witnesses.

These are solver-independent certificates: threshold inequalities evaluate
to plain arithmetic on equilibrium quantities, and witness fields carry
their own closed-form energy value so positivity can be checked against
the assembled solver on the same mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .equilibrium import EquilibriumProfile, Geometry, infimum_p_prime_rho
from .errors import (
    BadDirectionError,
    ConcentrationError,
    DegenerateModeError,
    FieldOrientationError,
)
from .modereduce import (
    FormCoefficients,
    FourierMode,
    ModeField,
    compressibility_form,
    energy_form,
    gravity_form,
)
from .params import MHD, PhysicalParams

#: background resolution of witness sample grids (per layer)
WITNESS_POINTS = 65536
#: dyadic refinement levels inserted around coefficient or field kinks
KINK_LEVELS = 48


@dataclass(frozen=True)
class ThresholdReport:
    """Outcome of one closed-form sufficient condition."""

    kind: str                      # 'vertical_field' or 'viscoelastic'
    threshold_value: float
    actual_value: float
    sufficient_stability: bool
    inputs: dict


@dataclass
class WitnessField:
    """Explicit trial field certifying instability when its energy is positive."""

    mode: FourierMode
    grid: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    psi: np.ndarray
    energy_value: float
    closed_form_value: float
    diagnostics: dict = field(default_factory=dict)

    def to_mode_field(self) -> ModeField:
        """Complex ModeField with the real-ansatz phase convention."""
        values = np.zeros((self.grid.size, 3), dtype=complex)
        values[:, 0] = -1j * self.phi
        values[:, 1] = -1j * self.theta
        values[:, 2] = self.psi
        values[0] = values[-1] = 0.0
        return ModeField(self.grid, values)


def vertical_field_threshold(profile: EquilibriumProfile, lam: float,
                             M3: float = 0.0) -> ThresholdReport:
    """Sufficient vertical-field strength for stability.

    threshold = (2*(g*(h+ - h-)*||rho||_inf)^2 / (P_inf*pi^2) + P_inf) / lam;
    stability is guaranteed when M3^2 strictly exceeds it.  The condition is
    sufficient, not necessary.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    geo = profile.geometry
    p_inf = infimum_p_prime_rho(profile)
    rho_max = profile.sup_density()
    gh = profile.g * geo.height * rho_max
    threshold = (2.0 * gh * gh / (p_inf * math.pi ** 2) + p_inf) / lam
    return ThresholdReport(
        kind="vertical_field",
        threshold_value=threshold,
        actual_value=M3 * M3,
        sufficient_stability=M3 * M3 > threshold,
        inputs={
            "p_inf": p_inf, "rho_max": rho_max, "g": profile.g,
            "h_minus": geo.h_minus, "h_plus": geo.h_plus, "lam": lam,
            "rho_jump": profile.density_jump,
        },
    )


def viscoelastic_threshold(profile: EquilibriumProfile, kappa_plus: float,
                           kappa_minus: float) -> ThresholdReport:
    """Sufficient elasticity for stability: g*[[rho]]*h+*h-/(h- - h+) < min kappa."""
    geo = profile.geometry
    jump = profile.density_jump
    threshold = profile.g * jump * geo.h_plus * geo.h_minus / (geo.h_minus - geo.h_plus)
    actual = min(kappa_plus, kappa_minus)
    return ThresholdReport(
        kind="viscoelastic",
        threshold_value=threshold,
        actual_value=actual,
        sufficient_stability=actual > threshold,
        inputs={
            "g": profile.g, "rho_jump": jump,
            "h_minus": geo.h_minus, "h_plus": geo.h_plus,
            "kappa_plus": kappa_plus, "kappa_minus": kappa_minus,
        },
    )


def _refine_around(grid: np.ndarray, points, levels: int = KINK_LEVELS) -> np.ndarray:
    """Insert dyadically shrinking nodes on both sides of each kink point."""
    extra = []
    h0 = np.max(np.diff(grid))
    for p in points:
        offsets = h0 * 0.5 ** np.arange(1, levels + 1)
        extra.append(p + offsets)
        extra.append(p - offsets)
        extra.append(np.array([p]))
    out = np.unique(np.concatenate([grid] + extra))
    return out[(out >= grid[0]) & (out <= grid[-1])]


def witness_grid(geometry: Geometry, kinks=(), n: int = WITNESS_POINTS) -> np.ndarray:
    """Uniform high-resolution grid with dyadic clusters at 0 and the kinks."""
    base = np.unique(np.concatenate([
        np.linspace(geometry.h_minus, 0.0, n + 1),
        np.linspace(0.0, geometry.h_plus, n + 1),
    ]))
    return _refine_around(base, [0.0, *kinks])


def default_bump(geometry: Geometry) -> Callable[[np.ndarray], np.ndarray]:
    """Quartic bump ((h+ - y)(y - h-)/(-h+h-))^2, equal to 1 at the interface.

    The squared form also has vanishing slope at the walls, so the derived
    horizontal witness components vanish there and the whole witness is
    admissible; a plain quadratic bump would leave them nonzero at the
    Dirichlet boundary.
    """
    hp, hm = geometry.h_plus, geometry.h_minus

    def shape(y):
        return ((hp - y) * (y - hm) / (-hp * hm)) ** 2

    return shape


def _default_bump_derivative(geometry: Geometry):
    hp, hm = geometry.h_plus, geometry.h_minus

    def dshape(y):
        return 2.0 * ((hp - y) * (y - hm) / (-hp * hm)) * (hp + hm - 2.0 * y) / (-hp * hm)

    return dshape


def horizontal_field_witness(profile: EquilibriumProfile, params: PhysicalParams,
                             mode: FourierMode,
                             psi0_shape: Optional[Callable] = None,
                             psi0_derivative: Optional[Callable] = None,
                             grid: Optional[np.ndarray] = None) -> WitnessField:
    """Explicit trial field for a horizontal base field M = (M1, 0, 0).

    The choices theta0 = -xi2*psi0'/|xi|^2 and
    phi0 = (g*rho*psi0/(P'(rho)*rho) - psi0' - xi2*theta0)/xi1 collapse the
    energy to the closed form
    g*[[rho]]*psi0(0)^2 - lam*xi1^2*M1^2 * int(psi0^2 + psi0'^2/|xi|^2),
    which is positive for large enough first period.
    """
    if mode.xi1 == 0.0:
        raise DegenerateModeError("witness needs xi1 != 0")
    if params.M[1] != 0.0 or params.M[2] != 0.0:
        raise FieldOrientationError("witness needs a base field along the first axis")
    geo = profile.geometry
    if grid is None:
        grid = witness_grid(geo)
    if psi0_shape is None:
        psi0_shape = default_bump(geo)
        psi0_derivative = _default_bump_derivative(geo)
    if psi0_derivative is None:
        raise ValueError("psi0_derivative is required with a custom psi0_shape")

    xi1, xi2 = mode.xi1, mode.xi2
    xi2n = mode.norm2
    psi = psi0_shape(grid)
    dpsi = psi0_derivative(grid)
    theta = -xi2 * dpsi / xi2n

    # phi carries the equilibrium coefficients; two-sided at the interface node
    phi = np.empty_like(psi)
    lower = grid <= 0.0
    upper = ~lower
    iface = int(np.nonzero(grid == 0.0)[0][0])
    for mask, side in ((lower, "-"), (upper, "+")):
        rho, _, pp_rho = profile.evaluate_layer(grid[mask], side)
        phi[mask] = (profile.g * rho * psi[mask] / pp_rho - dpsi[mask] - xi2 * theta[mask]) / xi1
    rho_p, _, pp_p = profile.evaluate_layer(np.array([0.0]), "+")
    phi[iface] = (profile.g * rho_p[0] * psi[iface] / pp_p[0] - dpsi[iface] - xi2 * theta[iface]) / xi1

    witness = WitnessField(
        mode=mode, grid=grid, phi=phi, theta=theta, psi=psi,
        energy_value=0.0, closed_form_value=0.0,
    )
    fld = witness.to_mode_field()
    coeffs = FormCoefficients(profile, params, grid)
    witness.energy_value = energy_form(fld, coeffs, mode, MHD)
    witness.closed_form_value = closed_form_horizontal(profile, params, mode,
                                                       psi0_shape, psi0_derivative)
    witness.diagnostics = {
        "agreement": abs(witness.energy_value - witness.closed_form_value),
        "positive": witness.closed_form_value > 0.0,
    }
    return witness


def closed_form_horizontal(profile: EquilibriumProfile, params: PhysicalParams,
                           mode: FourierMode, psi0_shape: Callable,
                           psi0_derivative: Callable,
                           quad_points: int = 64) -> float:
    """g*[[rho]]*psi0(0)^2 - lam*xi1^2*M1^2 * int(psi0^2 + psi0'^2/|xi|^2).

    Integrates the analytic shape with composite Gauss panels per layer;
    independent of the form/assembly machinery.
    """
    geo = profile.geometry
    x, w = np.polynomial.legendre.leggauss(quad_points)
    total = 0.0
    for a, b in ((geo.h_minus, 0.0), (0.0, geo.h_plus)):
        y = 0.5 * (b - a) * x + 0.5 * (a + b)
        wy = 0.5 * (b - a) * w
        total += np.sum(wy * (psi0_shape(y) ** 2 + psi0_derivative(y) ** 2 / mode.norm2))
    psi0_at_0 = float(psi0_shape(np.array([0.0]))[0])
    return (profile.g * profile.density_jump * psi0_at_0 ** 2
            - params.lam * mode.xi1 ** 2 * params.M[0] ** 2 * total)


def horizontal_period_threshold(profile: EquilibriumProfile, params: PhysicalParams,
                                k1: int = 1, k2: int = 1,
                                psi0_shape: Optional[Callable] = None,
                                psi0_derivative: Optional[Callable] = None,
                                L1_bracket: Tuple[float, float] = (1e-3, 1e6),
                                tol: float = 1e-10) -> float:
    """Bisect the closed-form witness value in L1: positive for L1 above the root."""
    geo = profile.geometry
    if psi0_shape is None:
        psi0_shape = default_bump(geo)
        psi0_derivative = _default_bump_derivative(geo)

    def value(L1: float) -> float:
        mode = FourierMode(k1=k1, k2=k2, xi1=k1 / L1, xi2=k2 / geo.L2)
        return closed_form_horizontal(profile, params, mode, psi0_shape, psi0_derivative)

    lo, hi = L1_bracket
    f_lo, f_hi = value(lo), value(hi)
    if f_lo > 0.0:
        return lo
    if f_hi <= 0.0:
        raise DegenerateModeError("closed form never positive on the bracket")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if value(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def small_field_witness(profile: EquilibriumProfile, params: PhysicalParams,
                        epsilon: float, n_samples: int = 20) -> WitnessField:
    """Interface-concentrated tent witness at the smallest lattice mode (1, 0).

    psi_eps(y) = max(0, 1 - |y|/eps) concentrates at the interface where the
    jump dominates the interior stratification:
    int(rho*psi*psi') = -([[rho]]*psi(0)^2 + int(rho'*psi^2))/2 < 0 exactly
    when the jump term wins.  The witness is divergence-free, so its energy
    reduces to the gravity numerator.
    """
    geo = profile.geometry
    if not 0.0 < epsilon < min(geo.h_plus, -geo.h_minus):
        raise ValueError(f"epsilon={epsilon} outside (0, {min(geo.h_plus, -geo.h_minus)})")
    if profile.density_jump <= 0.0:
        raise ConcentrationError("witness requires a positive density jump")

    eps_used = None
    eps_smallest = None
    tried = []
    for j in range(n_samples):
        eps_j = epsilon * 0.5 ** j
        lhs = _jump_integral(profile, eps_j)
        tried.append((eps_j, lhs))
        if profile.g * lhs < 0.0:
            eps_smallest = eps_j
            if eps_used is None:
                eps_used = eps_j
    if eps_used is None:
        raise ConcentrationError(
            "g*int(rho*psi*psi') stayed nonnegative for all sampled widths: "
            "the jump is too weak against the interior stratification"
        )

    mode = FourierMode(k1=1, k2=0, xi1=1.0 / geo.L1, xi2=0.0)
    grid = witness_grid(geo, kinks=(-eps_used, eps_used))
    psi = np.maximum(0.0, 1.0 - np.abs(grid) / eps_used)
    dpsi = np.where(np.abs(grid) < eps_used, -np.sign(grid) / eps_used, 0.0)
    dpsi[grid == 0.0] = 0.0  # midpoint of the kink; phi value there is arbitrary
    phi = -dpsi / mode.xi1
    theta = np.zeros_like(psi)

    witness = WitnessField(mode=mode, grid=grid, phi=phi, theta=theta, psi=psi,
                           energy_value=0.0, closed_form_value=0.0)
    fld = witness.to_mode_field()
    coeffs = FormCoefficients(profile, params, grid)
    e1e2 = gravity_form(fld, coeffs, mode) - compressibility_form(fld, coeffs, mode)
    witness.energy_value = e1e2
    lhs = _jump_integral(profile, eps_used)
    witness.closed_form_value = -2.0 * profile.g * lhs
    witness.diagnostics = {
        "eps_used": eps_used,
        "eps_smallest_working": eps_smallest,
        "jump_integral": lhs,
        "identity_rhs": -0.5 * (_stratification_integral(profile, eps_used)
                                + profile.density_jump),
        "full_energy": energy_form(fld, coeffs, mode, params.medium),
        "samples": tried,
    }
    return witness


def _tent_panels(profile: EquilibriumProfile, eps: float, quad_points: int = 32):
    x, w = np.polynomial.legendre.leggauss(quad_points)
    for a, b, side in ((-eps, 0.0, "-"), (0.0, eps, "+")):
        y = 0.5 * (b - a) * x + 0.5 * (a + b)
        wy = 0.5 * (b - a) * w
        rho, _, _ = profile.evaluate_layer(y, side)
        yield y, wy, rho


def _jump_integral(profile: EquilibriumProfile, eps: float) -> float:
    """int(rho * psi_eps * psi_eps') over both layers (analytic tent)."""
    total = 0.0
    for y, wy, rho in _tent_panels(profile, eps):
        psi = 1.0 - np.abs(y) / eps
        dpsi = -np.sign(y) / eps
        total += float(np.sum(wy * rho * psi * dpsi))
    return total


def _stratification_integral(profile: EquilibriumProfile, eps: float) -> float:
    """int(rho' * psi_eps^2) over both layers (analytic tent)."""
    total = 0.0
    x, w = np.polynomial.legendre.leggauss(32)
    for a, b, side in ((-eps, 0.0, "-"), (0.0, eps, "+")):
        y = 0.5 * (b - a) * x + 0.5 * (a + b)
        wy = 0.5 * (b - a) * w
        _, rho_p, _ = profile.evaluate_layer(y, side)
        psi = 1.0 - np.abs(y) / eps
        total += float(np.sum(wy * rho_p * psi * psi))
    return total


def poincare_check(values: np.ndarray, grid: np.ndarray, mode: FourierMode,
                   nu, geometry: Geometry, quad_points: int = 8):
    """Verify ||phi|| <= (h+ - h-)/pi * ||nu . grad phi|| on one scalar profile.

    nu must have third component 1; the per-mode directional derivative is
    i*(nu1*xi1 + nu2*xi2) + d/dy3.  Returns (lhs, rhs, holds).
    """
    nu = np.asarray(nu, dtype=float)
    if nu.shape != (3,) or nu[2] != 1.0:
        raise BadDirectionError("direction must be (nu1, nu2, 1)")
    values = np.asarray(values, dtype=complex)
    if values[0] != 0 or values[-1] != 0:
        raise ValueError("scalar profile must vanish at the end points")
    lhs2, dir2 = _scalar_direction_norms(values, grid, mode, nu)
    rhs = (geometry.height / math.pi) * math.sqrt(dir2)
    lhs = math.sqrt(lhs2)
    return lhs, rhs, lhs <= rhs * (1.0 + 1e-10)


def trace_check(fld: ModeField, mode: FourierMode, nu, geometry: Geometry):
    """Verify |psi(0)| <= sqrt(h-h+/(h- - h+)) * ||nu . grad w|| on a ModeField."""
    nu = np.asarray(nu, dtype=float)
    if nu.shape != (3,) or nu[2] != 1.0:
        raise BadDirectionError("direction must be (nu1, nu2, 1)")
    dir2 = 0.0
    for c in range(3):
        _, d2 = _scalar_direction_norms(fld.values[:, c], fld.grid, mode, nu)
        dir2 += d2
    const = math.sqrt(geometry.h_minus * geometry.h_plus
                      / (geometry.h_minus - geometry.h_plus))
    lhs = abs(fld.interface_psi())
    rhs = const * math.sqrt(dir2)
    return lhs, rhs, lhs <= rhs * (1.0 + 1e-10)


def _scalar_direction_norms(values: np.ndarray, grid: np.ndarray, mode: FourierMode, nu):
    """(||f||^2, ||(i*(nu_h . xi) + d/dy)f||^2) for one piecewise-linear profile."""
    values = np.asarray(values, dtype=complex)
    h = np.diff(grid)
    v0, v1 = values[:-1], values[1:]
    x, w = np.polynomial.legendre.leggauss(4)
    t = (x + 1.0) / 2.0
    wt = w / 2.0
    vals = v0[:, None] * (1.0 - t)[None, :] + v1[:, None] * t[None, :]
    ders = ((v1 - v0) / h)[:, None] * np.ones_like(t)[None, :]
    factor = 1j * (nu[0] * mode.xi1 + nu[1] * mode.xi2)
    norm2 = float(np.sum((h[:, None] * wt[None, :]) * np.abs(vals) ** 2))
    dir2 = float(np.sum((h[:, None] * wt[None, :]) * np.abs(factor * vals + ders) ** 2))
    return norm2, dir2
