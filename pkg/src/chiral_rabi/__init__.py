"""Spectral solver for the Z_N-symmetric chiral Rabi model."""
from ._kernels import BACKEND
from .cf import (
    find_regular_energies,
    minimal_solution,
    spectral_F,
    eval_S0,
    coeff,
    dominant_branch_check,
)
from .clock import ClockPair, Rep, make_clock_pair, omega, verify_weyl_relations
from .eigensolver import (
    convergence_study,
    eig_hermitian,
    eigvalsh,
    sector_spectra,
    spectrum,
)
from .errors import ChiralRabiError
from .exceptional import (
    classify_energy,
    exceptional_energy,
    find_exceptional_crossing,
    indicial_exponent,
)
from .hamiltonian import build_H, build_H3_explicit, build_H_tilde, build_Pi, commutator_norm
from .model import ModelParams, Truncation
from .symmetry import block_diagonalize, build_U, sector_formula

__version__ = "0.1.0"
