"""Debye phonon bath: damping of the tunneling oscillation and purity loss.

Mass and volume never appear separately. With the Debye cutoff
omega_D^3 = 6 pi^2 c^3 / V and M = rho V, every formula only needs
M * omega_D^3 = 6 pi^2 rho c^3.

Transition frequencies are signed, (E_m - E_{m+-2}) / hbar, and enter the
rate expressions literally. The Bose-factor combinations come out positive
for either sign; that is asserted rather than forced with absolute values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .constants import HBAR, KB
from .core_model import HalfInteger, SpinSystem, transition_data
from .spectra import delta_omega_instanton, instanton_splitting


@dataclass(frozen=True)
class BathParams:
    """Spin-phonon coupling B_int (J), mass density rho (kg/m^3), sound velocity c (m/s)."""

    B_int: float
    rho: float
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.B_int) and self.B_int >= 0):
            raise ValueError(f"B_int must be finite and >= 0, got {self.B_int!r}")
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ValueError(f"rho must be finite and > 0, got {self.rho!r}")
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError(f"c must be finite and > 0, got {self.c!r}")

    @property
    def mass_times_debye_cubed(self) -> float:
        """M * omega_D^3 = 6 pi^2 rho c^3 (kg / s^3)."""
        return 6.0 * math.pi**2 * self.rho * self.c**3


@dataclass(frozen=True)
class RateResult:
    """A rate (1/s) together with the parameter point that produced it."""

    rate: float
    sys: SpinSystem
    bath: BathParams
    T: float
    m: Optional[float] = None

    @property
    def time(self) -> float:
        return math.inf if self.rate == 0 else 1.0 / self.rate


class Evaluation(NamedTuple):
    """A perturbative quantity and whether it lies inside its validity range."""

    value: float
    valid: bool


def _check_temperature(T: float) -> float:
    T = float(T)
    if not (T >= 0 and math.isfinite(T)):
        raise ValueError(f"temperature must be finite and >= 0 K, got {T!r}")
    return T


def spectral_density(bath: BathParams, omega: float) -> float:
    """Superohmic J(omega) = 9 pi B_int^2 omega^3 / (2 M c^2 omega_D^3)."""
    if omega < 0:
        raise ValueError(f"spectral density needs omega >= 0, got {omega!r}")
    return 9.0 * math.pi * bath.B_int**2 * omega**3 / (2.0 * bath.mass_times_debye_cubed * bath.c**2)


def bose_factor(omega: float, T: float) -> float:
    """1 / (exp(hbar omega / kB T) - 1) for signed omega.

    T = 0 is the exact limit: 0 for omega > 0, -1 for omega < 0.
    """
    T = _check_temperature(T)
    if omega == 0:
        raise ZeroDivisionError("Bose factor diverges at omega = 0")
    if T == 0:
        return 0.0 if omega > 0 else -1.0
    x = HBAR * omega / KB / T  # KB * T underflows for subnormal T
    if x > 0:
        # e^{-x} / (1 - e^{-x}) avoids overflow for large x
        return math.exp(-x) / -math.expm1(-x)
    return 1.0 / math.expm1(x)


def _total_emission_factor(omega: float, T: float) -> float:
    """1 / (1 - exp(-hbar omega / kB T)), equal to 1 + bose_factor but without its cancellation."""
    T = _check_temperature(T)
    if omega == 0:
        raise ZeroDivisionError("emission factor diverges at omega = 0")
    if T == 0:
        return 1.0 if omega > 0 else 0.0
    x = HBAR * omega / KB / T  # KB * T underflows for subnormal T
    if x > 0:
        return -1.0 / math.expm1(-x)
    return math.exp(x) / math.expm1(x)


def damping_prefactor(bath: BathParams) -> float:
    """18 B_int^2 / (hbar M c^2 omega_D^3), units s^2."""
    return 18.0 * bath.B_int**2 / (HBAR * bath.mass_times_debye_cubed * bath.c**2)


def entropy_prefactor(bath: BathParams) -> float:
    """3 B_int^2 / (4 pi^2 hbar rho c^5), units s^2."""
    return 3.0 * bath.B_int**2 / (4.0 * math.pi**2 * HBAR * bath.rho * bath.c**5)


def damping_rate(sys: SpinSystem, bath: BathParams, T: float) -> RateResult:
    """gamma(beta) damping the ground-doublet oscillation.

    gamma = 18 B_int^2 s_{-2} w^3 / (hbar M c^2 w_D^3 (exp(hbar w / kB T) - 1))
    with w = omega_{s,s-2} < 0, so the T = 0 limit is finite and positive.
    """
    T = _check_temperature(T)
    if sys.two_s < 4:
        raise ValueError("damping rate needs s >= 2 (level s-2 must exist)")
    data = transition_data(sys, sys.s)
    omega = data.omega_down
    rate = damping_prefactor(bath) * data.s_minus2 * omega**3 * bose_factor(omega, T)
    assert rate >= 0, f"negative damping rate {rate} at T={T}"
    return RateResult(rate, sys, bath, T, float(sys.s))


def tunneling_probability(
    sys: SpinSystem,
    bath: BathParams,
    T: float,
    t: float,
    form: str = "exponential",
) -> Evaluation:
    """Probability of finding |-s> at time t after preparing |+s>.

    ``bracket``: sin^2(dw t/2) [1 - gamma t], as the perturbative result
    stands; it is reported raw and flagged invalid once gamma t > 1.
    ``exponential``: sin^2(dw t/2) exp(-gamma t), clamped to [0, 1].
    dw is the instanton frequency, taken as 0 when it underflows.
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t!r}")
    if form not in ("bracket", "exponential"):
        raise ValueError(f"form must be 'bracket' or 'exponential', got {form!r}")
    gamma = damping_rate(sys, bath, T).rate
    dw = delta_omega_instanton(instanton_splitting(sys))
    oscillation = math.sin(dw * t / 2.0) ** 2
    if form == "bracket":
        return Evaluation(oscillation * (1.0 - gamma * t), gamma * t <= 1.0)
    return Evaluation(min(max(oscillation * math.exp(-gamma * t), 0.0), 1.0), True)


def entropy_rate(sys: SpinSystem, bath: BathParams, T: float, m: HalfInteger) -> RateResult:
    """Growth rate of the linear entropy starting from |m>; time is tau_dec.

    rate = 3 B_int^2 / (4 pi^2 hbar rho c^5)
           * sum over m' = m+-2 of s_{+-2}^m w^3 / (1 - exp(-hbar w / kB T))

    A transition between degenerate levels (w = 0, i.e. m = -+1) contributes
    its limit, 0.
    """
    T = _check_temperature(T)
    data = transition_data(sys, m)
    total = 0.0
    for coefficient, omega in ((data.s_plus2, data.omega_up), (data.s_minus2, data.omega_down)):
        if coefficient == 0 or omega == 0:
            continue
        term = coefficient * omega**3 * _total_emission_factor(omega, T)
        assert term >= 0, f"negative entropy-rate term {term} at m={m}, T={T}"
        total += term
    return RateResult(entropy_prefactor(bath) * total, sys, bath, T, data.m)


def linear_entropy(
    sys: SpinSystem, bath: BathParams, T: float, m: HalfInteger, t: float
) -> Evaluation:
    """Linearized 1 - Tr(rho_S^2) at time t; flagged invalid above 1."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t!r}")
    value = entropy_rate(sys, bath, T, m).rate * t
    return Evaluation(value, value <= 1.0)
