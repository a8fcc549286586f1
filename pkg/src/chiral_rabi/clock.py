"""Clock and shift operators (generalised Pauli matrices) on C^N."""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
import cmath

import numpy as np

from .errors import InvalidDimension


class Rep(str, Enum):
    Z_DIAGONAL = "ZDiagonal"
    X_DIAGONAL = "XDiagonal"


@lru_cache(maxsize=None)
def roots_of_unity(N):
    """Tuple ``(w^0, ..., w^{N-1})`` with ``w = exp(2 pi i / N)``.

    Each power is evaluated directly from its angle (never by repeated
    multiplication); quarter turns are exact.
    """
    if N < 2:
        raise InvalidDimension(f"N must be >= 2, got {N}")
    exact = {0: 1.0 + 0j, 1: 1j, 2: -1.0 + 0j, 3: -1j}
    out = []
    for k in range(N):
        if (4 * k) % N == 0:
            out.append(exact[4 * k // N])
        else:
            out.append(cmath.exp(2j * cmath.pi * k / N))
    return tuple(out)


def omega(N):
    """Primitive N-th root of unity ``exp(2 pi i / N)``."""
    return roots_of_unity(N)[1 % N]


def omega_pow(N, k):
    return roots_of_unity(N)[k % N]


def _shift(N, m):
    # (S^m)_{l,k} = delta_{l, k+m mod N}
    S = np.zeros((N, N), dtype=complex)
    k = np.arange(N)
    S[(k + m) % N, k] = 1.0
    return S


def _phase(N, m, sign=1):
    # diag(w^{sign*m*k})
    return np.diag([omega_pow(N, sign * m * k) for k in range(N)])


@dataclass(frozen=True)
class ClockPair:
    """The pair (Z, X) obeying ``Z X = w X Z`` in one diagonal gauge."""

    dim: int
    Z: np.ndarray
    X: np.ndarray
    rep: Rep

    def Z_power(self, m):
        """``Z^m`` by index arithmetic mod N (exact, no accumulated phase)."""
        if self.rep is Rep.Z_DIAGONAL:
            return _phase(self.dim, m)
        return _shift(self.dim, m)

    def X_power(self, m):
        if self.rep is Rep.Z_DIAGONAL:
            return _shift(self.dim, m)
        return _phase(self.dim, m, sign=-1)


def make_clock_pair(N, rep=Rep.X_DIAGONAL):
    """Build Z, X on C^N.

    ``ZDiagonal``: Z = diag(1, w, ..., w^{N-1}), X_{l,m} = delta_{l,m+1}.
    ``XDiagonal``: X^dagger = diag(1, w, ..., w^{N-1}), Z_{l,m} = delta_{l,m+1}.
    """
    if N < 2:
        raise InvalidDimension(f"N must be >= 2, got {N}")
    rep = Rep(rep)
    if rep is Rep.Z_DIAGONAL:
        Z, X = _phase(N, 1), _shift(N, 1)
    else:
        Z, X = _shift(N, 1), _phase(N, 1, sign=-1)
    Z.setflags(write=False)
    X.setflags(write=False)
    return ClockPair(N, Z, X, rep)


def verify_weyl_relations(pair, tol=1e-12):
    """True iff Z^N = X^N = 1, Z^dag = Z^{N-1}, X^dag = X^{N-1} and
    ZX = w XZ all hold entrywise within ``tol``."""
    N = pair.dim
    Z, X = np.asarray(pair.Z), np.asarray(pair.X)
    eye = np.eye(N)
    ZN = np.linalg.matrix_power(Z, N)
    XN = np.linalg.matrix_power(X, N)
    checks = [
        ZN - eye,
        XN - eye,
        Z.conj().T - np.linalg.matrix_power(Z, N - 1),
        X.conj().T - np.linalg.matrix_power(X, N - 1),
        Z @ X - omega(N) * (X @ Z),
    ]
    return all(np.max(np.abs(c)) <= tol for c in checks)
