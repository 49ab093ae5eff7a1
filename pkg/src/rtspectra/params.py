"""Physical parameter bundle shared by the form and assembly layers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

MHD = "mhd"
VISCOELASTIC = "viscoelastic"


@dataclass(frozen=True)
class PhysicalParams:
    """Viscosities, base magnetic field and elasticity coefficients.

    ``mu`` is the shear viscosity, ``bulk`` the bulk viscosity (the paper-
    style combination bulk - 2*mu/3 may be negative), ``lam`` the magnetic
    permeability factor, ``M`` the constant base field, ``kappa`` the
    elasticity coefficient per layer.
    """

    mu_plus: float = 1.0
    mu_minus: float = 1.0
    bulk_plus: float = 0.0
    bulk_minus: float = 0.0
    lam: float = 1.0
    M: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    kappa_plus: float = 0.0
    kappa_minus: float = 0.0
    medium: str = MHD

    def __post_init__(self):
        if not (self.mu_plus > 0.0 and self.mu_minus > 0.0):
            raise ValueError("shear viscosities must be positive")
        if self.bulk_plus < 0.0 or self.bulk_minus < 0.0:
            raise ValueError("bulk viscosities must be nonnegative")
        if not self.lam > 0.0:
            raise ValueError("lam must be positive")
        if self.kappa_plus < 0.0 or self.kappa_minus < 0.0:
            raise ValueError("elasticity coefficients must be nonnegative")
        if self.medium not in (MHD, VISCOELASTIC):
            raise ValueError(f"medium must be '{MHD}' or '{VISCOELASTIC}'")

    def side(self, name: str, side: str) -> float:
        suffix = "plus" if side == "+" else "minus"
        return getattr(self, f"{name}_{suffix}")

    @property
    def kappa_min(self) -> float:
        return min(self.kappa_plus, self.kappa_minus)
