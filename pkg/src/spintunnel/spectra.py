"""Ground-doublet tunneling splitting.

The Hamiltonian only couples m to m +- 2, so it splits into two parity
blocks that are each tridiagonal. The exact splitting comes from
implicit-shift QL on those blocks; when the doublet gap is too small for
double precision the blocks are re-solved in mpmath at increasing
precision. The closed-form instanton estimate is carried in log space
because (B/A)**s underflows for large spins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import mpmath
import numpy as np

from ._tql import tql_float, tql_generic
from .constants import HBAR
from .core_model import SpinSystem, ladder_coefficients

MAX_DIM = 20_001
# Below this log-magnitude (natural log of joules) the instanton splitting
# is treated as exactly zero downstream.
UNDERFLOW_LOG = -700.0
# A double-precision gap is accepted when it exceeds this fraction of the
# spectral norm; smaller gaps are re-solved in extended precision.
DOUBLE_TRUST = 1e-5
MP_MAX_BLOCK = 400
MP_START_DPS = 40
MP_MAX_DPS = 320
# Extended-precision gaps are accepted above norm * 10**(GUARD_DIGITS - dps).
GUARD_DIGITS = 16


class SignedLog(NamedTuple):
    """A real number stored as sign * exp(log_abs); sign is -1, 0 or +1."""

    sign: int
    log_abs: float

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_abs)
        except OverflowError:
            return self.sign * math.inf

    @property
    def log10_abs(self) -> float:
        return self.log_abs / math.log(10.0)

    @property
    def underflows(self) -> bool:
        return self.sign == 0 or self.log_abs < UNDERFLOW_LOG


@dataclass(frozen=True)
class ParityBlock:
    """One invariant tridiagonal block of the Hamiltonian.

    ``parity`` is "same" when s - m is even for every member, else "opposite".
    """

    parity: str
    two_m: tuple
    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def m_values(self) -> np.ndarray:
        return np.asarray(self.two_m, dtype=float) / 2.0

    def __len__(self) -> int:
        return len(self.diag)


@dataclass(frozen=True)
class SplittingResult:
    """Exact and instanton ground-doublet splittings (J).

    ``delta_e_exact`` is None when the gap is below numerical resolution;
    ``resolution`` bounds the error (or the gap itself when unresolved).
    """

    delta_e_exact: Optional[float]
    resolution: float
    e0: float
    e1: float
    delta_e_instanton: SignedLog
    precision_digits: int

    @property
    def resolved(self) -> bool:
        return self.delta_e_exact is not None

    @property
    def upper_bound(self) -> float:
        if self.delta_e_exact is None:
            return self.resolution
        return self.delta_e_exact + self.resolution

    @property
    def delta_omega_inst(self) -> float:
        return delta_omega_instanton(self.delta_e_instanton)


def _block_indices(sys: SpinSystem, parity: str) -> range:
    # s - m = two_s - i for basis index i; "same" parity means it is even
    start = sys.two_s % 2 if parity == "same" else (sys.two_s + 1) % 2
    return range(start, sys.dim, 2)


def parity_blocks(h: np.ndarray, sys: SpinSystem) -> tuple[ParityBlock, ParityBlock]:
    """Split a dense Hamiltonian into its (same, opposite) parity blocks."""
    h = np.asarray(h, dtype=float)
    if h.shape != (sys.dim, sys.dim):
        raise ValueError(f"expected a {sys.dim}x{sys.dim} matrix, got {h.shape}")
    i, j = np.nonzero(h)
    if np.any((np.abs(i - j) != 0) & (np.abs(i - j) != 2)):
        raise ValueError("Hamiltonian is not pentadiagonal with stride-2 couplings")
    blocks = []
    for parity in ("same", "opposite"):
        idx = np.array(_block_indices(sys, parity), dtype=int)
        two_m = tuple(int(2 * k - sys.two_s) for k in idx)
        diag = h[idx, idx].copy()
        offdiag = h[idx[1:], idx[:-1]].copy() if len(idx) > 1 else np.zeros(0)
        blocks.append(ParityBlock(parity, two_m, diag, offdiag))
    return blocks[0], blocks[1]


def hamiltonian_blocks(sys: SpinSystem) -> tuple[ParityBlock, ParityBlock]:
    """Parity blocks built directly, without the dense (2s+1)^2 matrix."""
    blocks = []
    for parity in ("same", "opposite"):
        idx = _block_indices(sys, parity)
        two_m = tuple(2 * k - sys.two_s for k in idx)
        diag = np.array([-sys.A * (tm / 2.0) ** 2 for tm in two_m])
        offdiag = np.array(
            [sys.B * math.sqrt(ladder_coefficients(sys.two_s, tm)[0]) for tm in two_m[:-1]]
        )
        blocks.append(ParityBlock(parity, two_m, diag, offdiag))
    return blocks[0], blocks[1]


def eigvals_tridiagonal(
    diag: Union[ParityBlock, Sequence[float], np.ndarray],
    offdiag: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Ascending eigenvalues of a real symmetric tridiagonal matrix.

    Accepts either a :class:`ParityBlock` or the diagonal and off-diagonal
    arrays. Implicit-shift QL, deterministic for identical input.
    """
    if isinstance(diag, ParityBlock):
        diag, offdiag = diag.diag, diag.offdiag
    d = np.array(diag, dtype=np.float64)
    off = np.zeros(0) if offdiag is None else np.asarray(offdiag, dtype=np.float64)
    if d.ndim != 1 or off.shape != (max(len(d) - 1, 0),):
        raise ValueError("offdiag must have exactly one fewer entry than diag")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(off))):
        raise ValueError("tridiagonal entries must be finite")
    if len(d) == 0:
        return d
    e = np.zeros_like(d)
    e[:-1] = off
    tql_float(d, e)
    return np.sort(d, kind="stable")


def _eigvals_mp(sys: SpinSystem, block: ParityBlock, dps: int) -> list:
    with mpmath.workdps(dps):
        A = mpmath.mpf(sys.A)
        B = mpmath.mpf(sys.B)
        d = [-A * mpmath.mpf(tm) ** 2 / 4 for tm in block.two_m]
        e = [B * mpmath.sqrt(ladder_coefficients(sys.two_s, tm)[0]) for tm in block.two_m[:-1]]
        e.append(mpmath.mpf(0))
        tql_generic(d, e)
        return sorted(d)


def _lowest_two(per_block: Sequence[Sequence]) -> tuple:
    # stable merge: ties keep the "same"-parity block first
    merged = sorted(
        ((val, k) for k, vals in enumerate(per_block) for val in vals[:2]),
        key=lambda pair: (pair[0], pair[1]),
    )
    return merged[0][0], merged[1][0]


def _spectral_norm_bound(blocks: Sequence[ParityBlock]) -> float:
    diag = max(float(np.max(np.abs(b.diag))) for b in blocks if len(b))
    off = max((float(np.max(np.abs(b.offdiag))) for b in blocks if len(b) > 1), default=0.0)
    return diag + 2.0 * off


def instanton_splitting(sys: SpinSystem) -> SignedLog:
    """(8 A s^{3/2} / sqrt(pi)) (B/A)^s cos(pi s), in log space.

    cos(pi s) is evaluated exactly from the parity of 2s: (-1)^s for integer
    spins and 0 for half-integer spins.
    """
    if not sys.B > 0:
        raise ValueError("instanton splitting requires B > 0")
    if not sys.is_integer:
        return SignedLog(0, -math.inf)
    sign = -1 if (sys.two_s // 2) % 2 else 1
    return SignedLog(sign, _instanton_log_abs(sys))


def _instanton_log_abs(sys: SpinSystem) -> float:
    s = float(sys.s)
    return (
        math.log(8.0 * sys.A)
        + 1.5 * math.log(s)
        - 0.5 * math.log(math.pi)
        + s * math.log(sys.B / sys.A)
    )


def delta_omega_instanton(delta_e: SignedLog) -> float:
    """|Delta E_inst| / hbar in rad/s, zero on the underflow path."""
    if delta_e.underflows:
        return 0.0
    return math.exp(delta_e.log_abs) / HBAR


def exact_splitting(sys: SpinSystem) -> SplittingResult:
    """E1 - E0 of the full spectrum, with the instanton estimate alongside."""
    if sys.dim > MAX_DIM:
        raise ValueError(f"dimension {sys.dim} exceeds the cap of {MAX_DIM}")
    blocks = [b for b in hamiltonian_blocks(sys) if len(b)]
    norm = _spectral_norm_bound(blocks)
    instanton = instanton_splitting(sys) if sys.B > 0 else SignedLog(0, -math.inf)

    e0, e1 = _lowest_two([eigvals_tridiagonal(b) for b in blocks])
    gap = e1 - e0
    n = max(len(b) for b in blocks)
    resolution = 4.0 * n * np.finfo(float).eps * norm

    if sys.B == 0:
        # diagonal blocks: eigenvalues are the exact entries -A m^2
        return SplittingResult(gap, 0.0, e0, e1, instanton, 16)
    if gap >= DOUBLE_TRUST * norm:
        return SplittingResult(gap, resolution, e0, e1, instanton, 16)
    if n > MP_MAX_BLOCK:
        return SplittingResult(None, max(gap, resolution), e0, e1, instanton, 16)

    # size the working precision from the instanton magnitude (cos dropped)
    dps = MP_START_DPS
    estimate_log10 = _instanton_log_abs(sys) / math.log(10.0)
    needed = GUARD_DIGITS + 10 - (estimate_log10 - math.log10(norm))
    dps = max(dps, int(math.ceil(needed)))
    while True:
        dps = min(dps, MP_MAX_DPS)
        with mpmath.workdps(dps):
            m0, m1 = _lowest_two([_eigvals_mp(sys, b, dps) for b in blocks])
            mp_gap = m1 - m0
            threshold = mpmath.mpf(norm) * mpmath.mpf(10) ** (GUARD_DIGITS - dps)
            resolved = mp_gap >= threshold
            gap, e0, e1 = float(mp_gap), float(m0), float(m1)
            resolution = float(threshold * mpmath.mpf(10) ** (-GUARD_DIGITS + 6))
        if resolved:
            return SplittingResult(gap, resolution, e0, e1, instanton, dps)
        if dps >= MP_MAX_DPS:
            return SplittingResult(None, max(gap, resolution), e0, e1, instanton, dps)
        dps *= 2
