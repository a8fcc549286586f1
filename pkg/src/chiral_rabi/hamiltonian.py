"""Dense matrices for H_N, the alternate H~_N and the Z_N generator Pi.

All operators act on C^N (x) Fock, spin index outer, Fock index inner.
"""
import numpy as np

from .clock import Rep, make_clock_pair, omega_pow
from .errors import (
    DimensionError,
    InvalidDimension,
    MissingParams,
    NonHermitianParams,
    UnsupportedDimension,
)

HERMITIAN_TOL = 1e-12


def build_boson_ops(trunc):
    """Truncated ``(b^dagger, b, b^dagger b)`` on Fock levels 0..n_max."""
    n = np.arange(trunc.n_max + 1)
    bdag = np.diag(np.sqrt(n[1:]).astype(complex), -1)
    b = bdag.conj().T.copy()
    number = np.diag(n.astype(complex))
    return bdag, b, number


def fock_rotation(N, trunc, power=1):
    """``R^power`` with ``R = exp(2 pi i b^dagger b / N)``; phases by index mod N."""
    return np.diag([omega_pow(N, power * n) for n in range(trunc.n_max + 1)])


def hermiticity_error(M):
    return float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0


def _check_hermitian(M, what):
    err = hermiticity_error(M)
    scale = max(1.0, float(np.max(np.abs(M))))
    if err > HERMITIAN_TOL * scale:
        raise NonHermitianParams(f"{what} is not hermitian (max |M - M^dag| = {err:.3e})")
    return M


def _level_term(params, pair, fock_eye):
    N = params.N
    out = np.zeros((N * fock_eye.shape[0],) * 2, dtype=complex)
    for m in range(1, N):
        out += params.alpha(m) * np.kron(pair.Z_power(m), fock_eye)
    return params.Delta * out


def build_H(params, trunc, rep=Rep.X_DIAGONAL):
    """``Omega b^dag b + Delta sum_m alpha_m Z^m + lambda (X^dag b^dag + X b)``.

    The canonical gauge is ``XDiagonal``; ``ZDiagonal`` is available for
    comparison with Pauli-matrix constructions at N = 2.
    """
    params.validate()
    pair = make_clock_pair(params.N, rep)
    bdag, b, number = build_boson_ops(trunc)
    eye_f = np.eye(trunc.fock_dim)
    X = np.asarray(pair.X)
    H = params.Omega * np.kron(np.eye(params.N), number)
    H = H + _level_term(params, pair, eye_f)
    H = H + params.lam * (np.kron(X.conj().T, bdag) + np.kron(X, b))
    return _check_hermitian(H, "H_N")


def build_H3_explicit(params, trunc):
    """The N = 3 Hamiltonian assembled block by block in the XDiagonal gauge:
    diagonal blocks ``Omega b^dag b + lambda(w^k b^dag + w^{-k} b)``,
    off-diagonal blocks ``Delta alpha_1`` below and ``Delta alpha_2`` above
    the diagonal (cyclically)."""
    if params.N != 3:
        raise UnsupportedDimension("build_H3_explicit needs N = 3")
    params.validate()
    bdag, b, number = build_boson_ops(trunc)
    eye_f = np.eye(trunc.fock_dim)
    d = trunc.fock_dim
    a1, a2 = params.alpha(1), params.alpha(2)
    blocks = [[None] * 3 for _ in range(3)]
    for k in range(3):
        w_k = omega_pow(3, k)
        blocks[k][k] = params.Omega * number + params.lam * (w_k * bdag + w_k.conjugate() * b)
        blocks[(k + 1) % 3][k] = params.Delta * a1 * eye_f
        blocks[k][(k + 1) % 3] = params.Delta * a2 * eye_f
    H = np.zeros((3 * d, 3 * d), dtype=complex)
    for i in range(3):
        for j in range(3):
            H[i * d:(i + 1) * d, j * d:(j + 1) * d] = blocks[i][j]
    return _check_hermitian(H, "H_3")


def build_Pi(N, trunc):
    """Symmetry generator ``Pi = Z exp(2 pi i b^dag b / N)`` (XDiagonal gauge)."""
    if N < 2:
        raise InvalidDimension(f"N must be >= 2, got {N}")
    pair = make_clock_pair(N, Rep.X_DIAGONAL)
    return np.kron(np.asarray(pair.Z), fock_rotation(N, trunc))


def commutator_norm(A, B):
    """Frobenius norm of ``AB - BA``."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
        raise DimensionError(f"need equal square matrices, got {A.shape} and {B.shape}")
    return float(np.linalg.norm(A @ B - B @ A))


def build_H_tilde(params, trunc, check_hermitian=True):
    """Alternate Hamiltonian with coupling
    ``lambda sum_m beta_m [X^m (b^dag)^{N-m} + (X^dag)^m b^{N-m}]``.

    Built literally from that expression.  The result is hermitian when the
    betas are real; with complex conjugate-paired betas the two terms of
    each bracket are not each other's adjoints, and ``check_hermitian``
    makes that a :class:`NonHermitianParams` error.
    """
    if params.betas is None:
        raise MissingParams("H_tilde needs betas")
    params.validate()
    N = params.N
    pair = make_clock_pair(N, Rep.X_DIAGONAL)
    bdag, b, number = build_boson_ops(trunc)
    eye_f = np.eye(trunc.fock_dim)
    H = params.Omega * np.kron(np.eye(N), number) + _level_term(params, pair, eye_f)
    coupling = np.zeros_like(H)
    for m in range(1, N):
        Xm = pair.X_power(m)
        up = np.linalg.matrix_power(bdag, N - m)
        down = np.linalg.matrix_power(b, N - m)
        coupling += params.betas[m - 1] * (np.kron(Xm, up) + np.kron(Xm.conj().T, down))
    H = H + params.lam * coupling
    if check_hermitian:
        _check_hermitian(H, "H_tilde")
    return H


def interior_projector(N, trunc, margin=None):
    """Diagonal 0/1 projector onto Fock levels ``n <= n_max - margin``
    (default margin N) in every spin block."""
    margin = N if margin is None else margin
    keep = (np.arange(trunc.fock_dim) <= trunc.n_max - margin).astype(float)
    return np.diag(np.tile(keep, N))


def interior_commutator_norm(H, Pi, N, trunc):
    P = interior_projector(N, trunc)
    return commutator_norm(P @ H @ P, P @ Pi @ P)
