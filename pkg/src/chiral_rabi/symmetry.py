"""Fulton-Gouterman block diagonalisation of H_N into Z_N sectors.

Sector ``s`` is the s-th diagonal block of ``U^dag H U``.  With U as built
here, Pi acts on that block's columns as ``w^{-s}`` (see
:func:`pi_eigenphase_of_block`); the block's Hamiltonian is
``Omega b^dag b + lambda (b^dag + b) + Delta sum_m alpha_{N-m} w^{ms} R^m``.
"""
from dataclasses import dataclass

import numpy as np

from .clock import omega_pow
from .errors import FormulaMismatch, InvalidDimension, SymmetryBroken
from .hamiltonian import build_boson_ops, build_H, build_Pi, fock_rotation
from .model import ModelParams, Truncation

OFFDIAG_TOL = 1e-10
FORMULA_TOL = 1e-10


@dataclass(frozen=True)
class FGTransform:
    N: int
    U: np.ndarray
    trunc: Truncation

    def columns(self, s):
        """Columns of U spanning sector s."""
        d = self.trunc.fock_dim
        return self.U[:, s * d:(s + 1) * d]

    def unitarity_error(self):
        return float(np.max(np.abs(self.U.conj().T @ self.U - np.eye(self.U.shape[0]))))


@dataclass(frozen=True)
class BlockHamiltonian:
    """One Z_N sector: its matrix plus the data behind its recurrence."""

    s: int
    matrix: np.ndarray
    params: ModelParams

    @property
    def pi_eigenvalue(self):
        return omega_pow(self.params.N, -self.s)

    def diagonal_period(self):
        """Level-splitting diagonal ``d_k`` (entry at Fock n is ``d_{n mod N}``)."""
        return sector_diagonal(self.params, self.s)


def sector_diagonal(params, s):
    """Real diagonal of ``Delta sum_m alpha_{N-m} w^{m(n+s)}`` over one period.

    Hermiticity of the couplings makes it real; the imaginary residue is
    checked rather than assumed away.
    """
    N = params.N
    vals = []
    for k in range(N):
        z = sum(params.alpha(N - m) * omega_pow(N, m * (k + s)) for m in range(1, N))
        z *= params.Delta
        if abs(z.imag) > 1e-12 * max(1.0, abs(z)):
            raise FormulaMismatch(f"sector diagonal not real: {z}")
        vals.append(z.real)
    return np.array(vals)


def build_U(N, trunc):
    """Block (r, g) of U is ``w^{r g} R^r / sqrt(N)`` (0-based r, g)."""
    if N < 2:
        raise InvalidDimension(f"N must be >= 2, got {N}")
    d = trunc.fock_dim
    U = np.zeros((N * d, N * d), dtype=complex)
    for r in range(N):
        Rr = np.diag(fock_rotation(N, trunc, r))
        for g in range(N):
            U[r * d:(r + 1) * d, g * d:(g + 1) * d] = np.diag(omega_pow(N, r * g) * Rr)
    U /= np.sqrt(N)
    return FGTransform(N, U, trunc)


def offdiag_block_norm(M, N, d):
    mask = np.ones_like(M, dtype=bool)
    for s in range(N):
        mask[s * d:(s + 1) * d, s * d:(s + 1) * d] = False
    return float(np.linalg.norm(M[mask]))


def block_diagonalize(H, fg, params, tol=OFFDIAG_TOL):
    """Conjugate by U and split into N sector blocks (s = 0..N-1)."""
    N, d = fg.N, fg.trunc.fock_dim
    if H.shape != fg.U.shape:
        raise SymmetryBroken(f"H has shape {H.shape}, U has {fg.U.shape}")
    T = fg.U.conj().T @ H @ fg.U
    off = offdiag_block_norm(T, N, d)
    scale = np.linalg.norm(H)
    if off > tol * scale:
        raise SymmetryBroken(f"off-diagonal block norm {off:.3e} exceeds {tol:g} * ||H||_F")
    blocks = []
    for s in range(N):
        B = T[s * d:(s + 1) * d, s * d:(s + 1) * d]
        blocks.append(BlockHamiltonian(s, 0.5 * (B + B.conj().T), params))
    return blocks


def _formula_matrix(params, s, trunc):
    bdag, b, number = build_boson_ops(trunc)
    n = np.arange(trunc.fock_dim)
    diag = sector_diagonal(params, s)[n % params.N]
    return params.Omega * number + params.lam * (bdag + b) + np.diag(diag.astype(complex))


def sector_formula(params, s, trunc, verify=None):
    """Sector Hamiltonian from its closed form.

    The closed form is displayed in the literature only for N = 3, so for
    any other N it is checked against the s-th block of ``U^dag H U`` and
    :class:`FormulaMismatch` is raised on disagreement.  ``verify=True``
    forces the check for N = 3 too.
    """
    if not 0 <= s < params.N:
        raise ValueError(f"sector must be in 0..{params.N - 1}, got {s}")
    M = _formula_matrix(params, s, trunc)
    if verify is None:
        verify = params.N != 3
    if verify:
        ref = block_diagonalize(build_H(params, trunc), build_U(params.N, trunc), params)[s].matrix
        err = float(np.max(np.abs(M - ref)))
        if err > FORMULA_TOL:
            raise FormulaMismatch(f"sector {s} formula deviates from U^dag H U by {err:.3e}")
    return BlockHamiltonian(s, M, params)


def pi_eigenphase_of_block(fg, s):
    """Index k with ``Pi U_s = w^k U_s`` for the sector-s columns of U."""
    N = fg.N
    cols = fg.columns(s)
    image = build_Pi(N, fg.trunc) @ cols
    for k in range(N):
        if np.max(np.abs(image - omega_pow(N, k) * cols)) < 1e-12:
            return k
    raise SymmetryBroken(f"columns of sector {s} are not a Pi eigenspace")
