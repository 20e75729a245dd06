"""Isotropic elastic material constants, wave speeds and wavenumbers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Material:
    """Isotropic linear-elastic material.

    Attributes
    ----------
    lam : float
        First Lame constant [Pa].
    mu : float
        Shear modulus [Pa].
    rho : float
        Mass density [kg/m^3].
    """

    lam: float
    mu: float
    rho: float

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise ValueError(f"shear modulus must be positive, got {self.mu}")
        if self.rho <= 0:
            raise ValueError(f"density must be positive, got {self.rho}")
        if self.lam + 2.0 * self.mu <= 0:
            raise ValueError("lambda + 2 mu must be positive")
        nu = self.nu
        if not -1.0 < nu < 0.5:
            raise ValueError(f"Poisson ratio {nu} outside (-1, 0.5)")

    @classmethod
    def from_lame(cls, lam: float, mu: float, rho: float) -> "Material":
        return cls(float(lam), float(mu), float(rho))

    @classmethod
    def from_young_poisson(cls, E: float, nu: float, rho: float) -> "Material":
        """Build from Young's modulus and Poisson's ratio.

        nu = 0 is exact: lam is exactly zero in that case.
        """
        if E <= 0:
            raise ValueError(f"Young's modulus must be positive, got {E}")
        if not -1.0 < nu < 0.5:
            raise ValueError(f"Poisson ratio {nu} outside (-1, 0.5)")
        mu = E / (2.0 * (1.0 + nu))
        lam = 0.0 if nu == 0.0 else E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
        return cls(lam, mu, float(rho))

    @property
    def E(self) -> float:
        """Young's modulus [Pa]."""
        return self.mu * (3.0 * self.lam + 2.0 * self.mu) / (self.lam + self.mu)

    @property
    def nu(self) -> float:
        """Poisson's ratio."""
        return self.lam / (2.0 * (self.lam + self.mu))

    @property
    def c_s(self) -> float:
        """Shear (S) wave speed [m/s]."""
        return float(np.sqrt(self.mu / self.rho))

    @property
    def c_p(self) -> float:
        """Pressure (P) wave speed [m/s]."""
        return float(np.sqrt((self.lam + 2.0 * self.mu) / self.rho))


def wave_speeds(m: Material) -> tuple[float, float]:
    """Return (c_s, c_p); always c_p > c_s > 0."""
    return m.c_s, m.c_p


def wavenumbers(m: Material, omega: complex) -> tuple[complex, complex]:
    """S and P wavenumbers k = omega / c at a (possibly complex) frequency.

    Frequencies produced by the exponential window carry a non-positive
    imaginary part (omega = k*dw - i*eta), so Im(k) <= 0 here.  The
    kernels pair these wavenumbers with radial factors exp(-i*k*r), which
    then decay like exp(-eta*r/c) in distance.
    """
    omega = complex(omega)
    if omega.imag > 1e-12 * max(1.0, abs(omega)):
        raise ValueError(f"frequency {omega} has positive imaginary part")
    return omega / m.c_s, omega / m.c_p
