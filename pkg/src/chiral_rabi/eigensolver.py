"""Dense hermitian eigensolver (cyclic complex Jacobi) and truncation studies.

This is the ground-truth oracle for every analytic result in the package.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NoConvergence, NotHermitian, PreconditionError, TruncationTooSmall
from .exceptional import classify_energy
from .hamiltonian import build_H
from .model import Truncation
from .symmetry import block_diagonalize, build_U

OFF_TOL = 1e-12
DEGENERACY_TOL = 1e-7
SECTOR_OVERLAP = 0.99


@dataclass
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray = None
    residual: float = None
    sweeps: int = 0


@dataclass
class EnergyLevel:
    index: int
    E: float
    sector: int
    kind: str
    degeneracy: int
    converged: bool = None
    drift: float = None


@dataclass
class ConvergenceReport:
    n_max_list: list
    level_table: np.ndarray  # (levels, len(n_max_list))
    converged_count: int
    tol: float
    drift: np.ndarray = field(default=None)

    def to_csv_rows(self):
        header = ["level_index"] + [f"n_max_{n}" for n in self.n_max_list] + ["drift_last"]
        rows = []
        for i, row in enumerate(self.level_table):
            rows.append([i, *row.tolist(), float(self.drift[i])])
        return header, rows


def eig_hermitian(M, want_vectors=False, max_sweeps=60, backend=None):
    """Eigenvalues (ascending) and optionally eigenvectors of hermitian ``M``.

    Cyclic two-sided Jacobi: sweeps over all index pairs, each pair
    annihilated by an exact 2x2 hermitian diagonalisation, until the
    off-diagonal Frobenius norm drops below ``1e-12 * ||M||_F``.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    scale = max(1.0, float(np.max(np.abs(M)))) if n else 1.0
    if n and np.max(np.abs(M - M.conj().T)) > 1e-10 * scale:
        raise NotHermitian("matrix is not hermitian within 1e-10")
    kern = _kernels if backend is None else _kernels.load_backend(backend)
    A = np.ascontiguousarray(0.5 * (M + M.conj().T))
    V = np.eye(n, dtype=complex) if want_vectors else np.zeros((1, 1), dtype=complex)
    fro = float(np.linalg.norm(M))
    tol = OFF_TOL * fro if fro > 0 else 0.0
    sweeps, off = kern.jacobi_hermitian(A, V, bool(want_vectors), tol, int(max_sweeps))
    if off > tol:
        raise NoConvergence(f"off-diagonal norm {off:.3e} after {sweeps} sweeps")
    d = np.diagonal(A)
    if n and np.max(np.abs(d.imag)) > 1e-12 * scale:
        raise NotHermitian("imaginary residue on the diagonal")
    order = np.argsort(d.real, kind="stable")
    values = d.real[order].copy()
    if not want_vectors:
        return EigenResult(values, sweeps=sweeps)
    vecs = V[:, order]
    resid = float(np.max(np.linalg.norm(M @ vecs - vecs * values, axis=0))) if n else 0.0
    return EigenResult(values, vecs, resid, sweeps)


def eigvalsh(M, **kw):
    return eig_hermitian(M, False, **kw).values


def cluster_levels(values, tol=DEGENERACY_TOL):
    """Group sorted values into runs whose neighbours differ by <= tol."""
    groups = []
    for i, v in enumerate(values):
        if groups and v - values[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _sector_resolve(vecs, fg, blocks):
    """Split a cluster of eigenvectors across sectors.

    Returns ``[(sector, energy), ...]``: the weight of the cluster in each
    sector's FG columns must be an integer (within 1 - SECTOR_OVERLAP), and
    energies come from the sector block restricted to that share.
    """
    out = []
    total = 0
    for s, blk in enumerate(blocks):
        Q = fg.columns(s).conj().T @ vecs
        w = float(np.sum(np.abs(Q) ** 2))
        count = int(round(w))
        if abs(w - count) > 1.0 - SECTOR_OVERLAP:
            raise TruncationTooSmall(f"sector weight {w:.4f} is not an integer")
        if count:
            basis = np.linalg.svd(Q, full_matrices=False)[0][:, :count]
            sub = basis.conj().T @ blk.matrix @ basis
            for e in eigvalsh(sub):
                out.append((s, float(e)))
        total += count
    if total != vecs.shape[1]:
        raise TruncationTooSmall("cluster does not decompose into sectors")
    return out


def spectrum(params, trunc, n_levels, degeneracy_tol=DEGENERACY_TOL):
    """Lowest ``n_levels`` oracle levels of H_N, tagged with sector and kind."""
    dim = trunc.dim(params.N)
    if n_levels < 1 or n_levels > dim // 4:
        raise PreconditionError(f"n_levels must be in 1..{dim // 4} for dimension {dim}")
    H = build_H(params, trunc)
    res = eig_hermitian(H, want_vectors=True)
    fg = build_U(params.N, trunc)
    blocks = block_diagonalize(H, fg, params)
    # extend the window so that a cluster straddling n_levels is kept whole
    top = n_levels
    while top < dim and res.values[top] - res.values[top - 1] <= degeneracy_tol:
        top += 1
    levels = []
    for group in cluster_levels(res.values[:top], degeneracy_tol):
        tagged = sorted(_sector_resolve(res.vectors[:, group], fg, blocks), key=lambda t: t[1])
        for (s, _), i in zip(tagged, group):
            E = float(res.values[i])
            levels.append(EnergyLevel(i, E, s, classify_energy(E, params), len(group)))
    return levels[:n_levels]


def convergence_study(params, n_max_list, tol, n_levels=None, workers=1):
    """Track the lowest levels of H_N as the Fock cutoff grows."""
    n_max_list = list(n_max_list)
    if len(n_max_list) < 2:
        raise PreconditionError("need at least two truncations")
    if any(b <= a for a, b in zip(n_max_list, n_max_list[1:])):
        raise PreconditionError("n_max_list must be strictly increasing")
    smallest = Truncation(n_max_list[0]).dim(params.N)
    if n_levels is None:
        n_levels = smallest // 4
    n_levels = min(n_levels, smallest)

    def run(n_max):
        return eigvalsh(build_H(params, Truncation(n_max)))[:n_levels]

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            cols = list(pool.map(run, n_max_list))
    else:
        cols = [run(n) for n in n_max_list]
    table = np.column_stack(cols)
    drift = np.abs(table[:, -1] - table[:, -2])
    return ConvergenceReport(n_max_list, table, int(np.sum(drift < tol)), tol, drift)


def sector_spectra(params, trunc):
    """Ascending eigenvalues of every sector block (list indexed by sector)."""
    fg = build_U(params.N, trunc)
    blocks = block_diagonalize(build_H(params, trunc), fg, params)
    return [eigvalsh(b.matrix) for b in blocks]


__all__ = [
    "EigenResult",
    "EnergyLevel",
    "ConvergenceReport",
    "eig_hermitian",
    "eigvalsh",
    "cluster_levels",
    "spectrum",
    "convergence_study",
    "sector_spectra",
]
