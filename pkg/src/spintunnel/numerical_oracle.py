"""Exact evolution of a small spin coupled to one truncated phonon mode.

H = H_S (x) 1 + 1 (x) hbar w a^dag a + g (S+^2 + S-^2) (x) (a^dag + a)

on the product basis |m> (x) |n>, index = i_m * (n_max + 1) + n. The state
is propagated by diagonalizing H once; the spin's reduced state comes from
tracing out the mode. This is an independent check on the perturbative
rates: a continuum cannot be reproduced with one mode, so the comparison
(:func:`golden_rule_entropy_slope`) replaces the energy-conserving delta
function with the finite-time sinc^2 window of the same second-order
amplitudes, evaluated analytically on the same time grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import HBAR, KB
from .core_model import (
    HalfInteger,
    SpinSystem,
    build_hamiltonian,
    build_splus,
    ladder_coefficients,
    twice,
    unperturbed_energy,
)

MAX_SPIN_TWICE = 6
MAX_N = 30
MAX_TOTAL_DIM = 124
MIN_STEPS = 100


@dataclass(frozen=True)
class OracleConfig:
    """One spin + one phonon mode.

    ``coupling`` is the scalar g (J) that absorbs B_int sqrt(hbar/2M w) k.
    ``initial_phonons`` is "vacuum" or "thermal"; a thermal start draws a
    single Fock occupation from the Bose-Einstein distribution at
    ``temperature`` with a seeded generator.
    """

    sys: SpinSystem
    mode_freq: float
    coupling: float
    n_max: int
    t_max: float
    steps: int
    initial_m: HalfInteger
    initial_phonons: str = "vacuum"
    temperature: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sys.two_s > MAX_SPIN_TWICE:
            raise ValueError(f"oracle supports s <= 3, got s={self.sys.s}")
        if not 0 <= self.n_max <= MAX_N:
            raise ValueError(f"n_max must be in [0, {MAX_N}], got {self.n_max}")
        if self.dim > MAX_TOTAL_DIM:
            raise ValueError(f"total dimension {self.dim} exceeds {MAX_TOTAL_DIM}")
        if self.steps < MIN_STEPS:
            raise ValueError(f"steps must be >= {MIN_STEPS}, got {self.steps}")
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ValueError(f"t_max must be positive, got {self.t_max!r}")
        if not (self.mode_freq >= 0 and math.isfinite(self.mode_freq)):
            raise ValueError(f"mode_freq must be >= 0, got {self.mode_freq!r}")
        if not math.isfinite(self.coupling):
            raise ValueError("coupling must be finite")
        if self.initial_phonons not in ("vacuum", "thermal"):
            raise ValueError(f"initial_phonons must be 'vacuum' or 'thermal', got {self.initial_phonons!r}")
        self.sys.check_m(self.initial_m)

    @property
    def dim(self) -> int:
        return self.sys.dim * (self.n_max + 1)

    def initial_occupation(self) -> int:
        if self.initial_phonons == "vacuum" or self.temperature == 0 or self.mode_freq == 0:
            return 0
        rng = np.random.default_rng(self.seed)
        # P(n) ~ exp(-n x): geometric with success probability 1 - exp(-x)
        x = HBAR * self.mode_freq / (KB * self.temperature)
        n = int(rng.geometric(-math.expm1(-x))) - 1
        return min(n, self.n_max)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.steps + 1)


@dataclass
class Trajectory:
    times: np.ndarray
    purity: np.ndarray
    p_minus_s: np.ndarray
    entropy: np.ndarray
    norm_drift: float = 0.0
    initial_occupation: int = 0


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    samples: int


def _mode_operators(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    n = np.arange(n_max + 1, dtype=float)
    a = np.diag(np.sqrt(n[1:]), k=1)
    return a, np.diag(n)


def build_total_hamiltonian(cfg: OracleConfig) -> np.ndarray:
    """Dense spin + mode Hamiltonian (J); real symmetric in the product basis."""
    a, number = _mode_operators(cfg.n_max)
    ident_mode = np.eye(cfg.n_max + 1)
    ident_spin = np.eye(cfg.sys.dim)
    sp = build_splus(cfg.sys)
    x_spin = sp @ sp
    x_spin = x_spin + x_spin.T
    h = (
        np.kron(build_hamiltonian(cfg.sys), ident_mode)
        + np.kron(ident_spin, HBAR * cfg.mode_freq * number)
        + cfg.coupling * np.kron(x_spin, a + a.T)
    )
    return 0.5 * (h + h.T)


def evolve(cfg: OracleConfig) -> Trajectory:
    """Propagate |m0> (x) |n0> exactly and record reduced-state diagnostics."""
    h = build_total_hamiltonian(cfg)
    if not np.all(np.isfinite(h)):
        raise ValueError("total Hamiltonian has non-finite entries")
    # rad/s units keep the eigensolve well scaled; the shift is a global phase
    energies, vectors = np.linalg.eigh(h / HBAR)
    energies = energies - energies[0]

    n0 = cfg.initial_occupation()
    psi0 = np.zeros(cfg.dim)
    psi0[cfg.sys.index(cfg.initial_m) * (cfg.n_max + 1) + n0] = 1.0
    amplitudes = vectors.T @ psi0

    times = cfg.times()
    phases = np.exp(-1j * np.outer(times, energies))
    states = (phases * amplitudes) @ vectors.T  # (n_times, dim)
    psi = states.reshape(len(times), cfg.sys.dim, cfg.n_max + 1)

    rho = np.einsum("tin,tjn->tij", psi, psi.conj())
    purity = np.einsum("tij,tji->t", rho, rho).real
    p_minus_s = rho[:, 0, 0].real
    norm = np.einsum("tii->t", rho).real
    return Trajectory(
        times=times,
        purity=purity,
        p_minus_s=p_minus_s,
        entropy=1.0 - purity,
        norm_drift=float(np.max(np.abs(norm - 1.0))),
        initial_occupation=n0,
    )


def fit_initial_slope(traj: Trajectory, window: float) -> SlopeFit:
    """Least-squares line through entropy(t) on the first ``window`` of the run."""
    if not 0 < window <= 0.5:
        raise ValueError(f"window must be in (0, 0.5], got {window!r}")
    t_end = window * traj.times[-1]
    mask = traj.times <= t_end * (1 + 1e-12)
    t, y = traj.times[mask], traj.entropy[mask]
    if len(t) < 10:
        raise ValueError(f"only {len(t)} samples in the fit window; need at least 10")
    design = np.column_stack([t, np.ones_like(t)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(residual**2))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return SlopeFit(float(slope), float(intercept), r_squared, int(len(t)))


def second_order_entropy(cfg: OracleConfig, times: Optional[np.ndarray] = None) -> np.ndarray:
    """Leading-order linear entropy 2 * sum_k P_k(t) from the sinc^2 window.

    Each channel m -> m+-2 with one phonon emitted (weight n+1) or absorbed
    (weight n) has P = g^2 s_{+-2}^m w (sin(D t/2) / (hbar D/2))^2 where D is
    the energy mismatch in rad/s, using the zeroth-order levels -A m^2.
    """
    times = cfg.times() if times is None else np.asarray(times, dtype=float)
    two_m = twice(cfg.initial_m, "initial_m")
    n0 = cfg.initial_occupation()
    e_m = unperturbed_energy(cfg.sys, cfg.initial_m)
    up, down = ladder_coefficients(cfg.sys.two_s, two_m)

    total = np.zeros_like(times)
    for coefficient, step in ((up, 4), (down, -4)):
        if coefficient == 0:
            continue
        gap = (unperturbed_energy(cfg.sys, (two_m + step) / 2) - e_m) / HBAR
        for weight, detuning in ((n0 + 1, gap + cfg.mode_freq), (n0, gap - cfg.mode_freq)):
            if weight == 0:
                continue
            if detuning == 0:
                window = times**2
            else:
                window = (np.sin(detuning * times / 2.0) / (detuning / 2.0)) ** 2
            total += weight * coefficient * window
    return 2.0 * (cfg.coupling / HBAR) ** 2 * total


def golden_rule_entropy_slope(cfg: OracleConfig, window: float) -> float:
    """Finite-window golden-rule entropy rate matched to :func:`fit_initial_slope`."""
    times = cfg.times()
    prediction = Trajectory(
        times=times,
        purity=1.0 - second_order_entropy(cfg, times),
        p_minus_s=np.zeros_like(times),
        entropy=second_order_entropy(cfg, times),
    )
    return fit_initial_slope(prediction, window).slope
