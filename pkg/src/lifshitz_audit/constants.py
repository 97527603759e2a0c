"""CODATA constants used throughout the package (SI units)."""

from dataclasses import dataclass

from scipy import constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = _sc.hbar
    c: float = _sc.c
    k_B: float = _sc.k
    alpha_fs: float = _sc.fine_structure
    a0: float = _sc.physical_constants["Bohr radius"][0]
    m_e: float = _sc.m_e
    # Hartree energy over hbar
    au_omega: float = _sc.physical_constants["atomic unit of energy"][0] / _sc.hbar
    e_hartree: float = _sc.physical_constants["atomic unit of energy"][0]

    @property
    def a0_over_alpha(self) -> float:
        """Length a0/alpha (about 7.25 nm) entering the atomic-only
        regime conditions."""
        return self.a0 / self.alpha_fs


CONSTANTS = PhysicalConstants()
