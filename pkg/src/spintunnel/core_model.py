"""Giant-spin algebra in the |m> basis.

Matrices are indexed by m ascending from -s to +s. Spin operators are
dimensionless (spin in units of hbar); Hamiltonians carry joules.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .constants import HBAR

HalfInteger = Union[int, float, Fraction, str]

REGIME_RATIO = 0.1


class RegimeWarning(UserWarning):
    """Raised (as a warning) when B/A is too large for A >> B to hold."""


def twice(value: HalfInteger, name: str = "value") -> int:
    """Return ``2*value`` as an exact integer, rejecting non-half-integers."""
    try:
        doubled = 2 * Fraction(value)
    except (ValueError, TypeError, OverflowError) as exc:
        raise ValueError(f"{name}={value!r} is not a number") from exc
    if doubled.denominator != 1:
        raise ValueError(f"{name}={value!r} is not a half-integer")
    return int(doubled)


@dataclass(frozen=True)
class SpinSystem:
    """Spin quantum number and anisotropy constants of H = -A Sz^2 + B (S+^2 + S-^2).

    ``two_s`` stores 2s so half-integer spins are exact.
    """

    two_s: int
    A: float
    B: float

    def __post_init__(self):
        if not isinstance(self.two_s, (int, np.integer)) or self.two_s < 1:
            raise ValueError(f"two_s must be a positive integer, got {self.two_s!r}")
        if not (math.isfinite(self.A) and self.A > 0):
            raise ValueError(f"A must be finite and > 0, got {self.A!r}")
        if not (math.isfinite(self.B) and self.B >= 0):
            raise ValueError(f"B must be finite and >= 0, got {self.B!r}")
        if self.B / self.A > REGIME_RATIO:
            warnings.warn(
                f"B/A = {self.B / self.A:.3g} > {REGIME_RATIO}; the A >> B regime does not hold",
                RegimeWarning,
                stacklevel=3,
            )

    @classmethod
    def from_spin(cls, s: HalfInteger, A: float, B: float) -> "SpinSystem":
        return cls(twice(s, "s"), float(A), float(B))

    @property
    def s(self) -> Fraction:
        return Fraction(self.two_s, 2)

    @property
    def dim(self) -> int:
        return self.two_s + 1

    @property
    def is_integer(self) -> bool:
        return self.two_s % 2 == 0

    def m_values(self) -> np.ndarray:
        """m = -s ... +s, ascending, as floats (exact for half-integers)."""
        return np.arange(-self.two_s, self.two_s + 1, 2) / 2.0

    def check_m(self, m: HalfInteger) -> int:
        """Validate ``m`` and return 2m."""
        two_m = twice(m, "m")
        if abs(two_m) > self.two_s or (two_m - self.two_s) % 2:
            raise ValueError(f"m={m} is not a valid projection for s={self.s}")
        return two_m

    def index(self, m: HalfInteger) -> int:
        """Row/column index of |m> in the ascending basis."""
        return (self.check_m(m) + self.two_s) // 2


@dataclass(frozen=True)
class TransitionData:
    """Coefficients and frequencies of the m -> m+-2 phonon transitions.

    Frequencies are signed, ``omega_up = (E_m - E_{m+2}) / hbar``; they are
    ``None`` when the target level lies outside the spin multiplet.
    """

    m: float
    s_plus2: int
    s_minus2: int
    omega_up: Optional[float]
    omega_down: Optional[float]


def build_sz(sys: SpinSystem) -> np.ndarray:
    return np.diag(sys.m_values())


def build_splus(sys: SpinSystem) -> np.ndarray:
    """Raising operator, <m+1|S+|m> = sqrt(s(s+1) - m(m+1))."""
    s = float(sys.s)
    m = sys.m_values()[:-1]
    return np.diag(np.sqrt(s * (s + 1) - m * (m + 1)), k=-1)


def build_sminus(sys: SpinSystem) -> np.ndarray:
    return build_splus(sys).T.copy()


def ladder_coefficients(two_s: int, two_m: int) -> tuple[int, int]:
    """Exact (s_plus2, s_minus2) = (|<m+2|S+^2|m>|^2, |<m-2|S-^2|m>|^2).

    s_{+2}^m = (s-m)(s+m+1)(s-m-1)(s+m+2) and its mirror, evaluated on the
    integers s-m and s+m.
    """
    a = (two_s - two_m) // 2  # s - m
    b = (two_s + two_m) // 2  # s + m
    return a * (b + 1) * (a - 1) * (b + 2), b * (a + 1) * (b - 1) * (a + 2)


def build_hamiltonian(sys: SpinSystem) -> np.ndarray:
    """Dense -A Sz^2 + B (S+^2 + S-^2) in joules.

    Off-diagonal entries are B*sqrt(s_{+2}^m) from the exact integer
    coefficient and mirrored, so the result is exactly symmetric.
    """
    d = sys.dim
    h = np.diag(-sys.A * sys.m_values() ** 2)
    for i in range(d - 2):
        two_m = 2 * i - sys.two_s
        up, _ = ladder_coefficients(sys.two_s, two_m)
        h[i + 2, i] = h[i, i + 2] = sys.B * math.sqrt(up)
    return h


def unperturbed_energy(sys: SpinSystem, m: HalfInteger) -> float:
    """Zeroth-order level energy E_m = -A m^2 (J)."""
    two_m = sys.check_m(m)
    return -sys.A * (two_m / 2.0) ** 2


def transition_data(sys: SpinSystem, m: HalfInteger) -> TransitionData:
    two_m = sys.check_m(m)
    up, down = ladder_coefficients(sys.two_s, two_m)
    e_m = unperturbed_energy(sys, Fraction(two_m, 2))
    omega_up = omega_down = None
    if up:
        omega_up = (e_m - unperturbed_energy(sys, Fraction(two_m + 4, 2))) / HBAR
    if down:
        omega_down = (e_m - unperturbed_energy(sys, Fraction(two_m - 4, 2))) / HBAR
    return TransitionData(two_m / 2.0, up, down, omega_up, omega_down)
