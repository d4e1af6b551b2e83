"""Spin tunneling and phonon-induced decoherence in giant-spin particles."""

from .bath_dynamics import (
    BathParams,
    RateResult,
    bose_factor,
    damping_rate,
    entropy_rate,
    linear_entropy,
    spectral_density,
    tunneling_probability,
)
from .core_model import (
    SpinSystem,
    TransitionData,
    build_hamiltonian,
    build_splus,
    build_sz,
    transition_data,
    unperturbed_energy,
)
from .spectra import (
    SplittingResult,
    eigvals_tridiagonal,
    exact_splitting,
    instanton_splitting,
    parity_blocks,
)

__version__ = "0.1.0"
