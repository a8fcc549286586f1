"""Exceptional energies ``E = Omega n - lambda^2 / Omega`` and level crossings.

At these energies the indicial exponent of the Bargmann-space equation is a
non-negative integer and the continued-fraction description degenerates.
Whether, and how often, a true level of H_N sits on one is decided here by
the dense oracle.
"""
from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import NoCrossingFound, PreconditionError

CLASSIFY_TOL = 1e-6
CROSSING_GAP = 1e-4
COUNT_TOL = 1e-6
SWEEPABLE = ("Delta", "lam", "phi", "Omega")


def exceptional_energy(script_N, Omega, lam):
    if script_N < 0 or int(script_N) != script_N:
        raise PreconditionError(f"exceptional index must be a non-negative integer, got {script_N}")
    return Omega * script_N - lam * lam / Omega


def indicial_exponent(E, Omega, lam):
    return E / Omega + (lam / Omega) ** 2


def nearest_exceptional(E, params):
    """``(n, E_exc(n))`` for the exceptional energy closest to E (n >= 0)."""
    n = max(0, round(indicial_exponent(E, params.Omega, params.lam)))
    return n, exceptional_energy(n, params.Omega, params.lam)


def classify_energy(E, params, tol=CLASSIFY_TOL):
    _, Ex = nearest_exceptional(E, params)
    return "exceptional" if abs(E - Ex) < tol else "regular"


@dataclass
class ExceptionalLevel:
    script_N: int
    E: float
    sector: int
    residual: float


@dataclass
class CrossingResult:
    script_N: int
    param: str
    value: float
    E_exceptional: float
    degeneracy_count: int
    gap: float
    sectors: list = field(default_factory=list)
    polynomial_evidence: float = None
    others: list = field(default_factory=list)

    def to_dict(self):
        return {
            "script_N": self.script_N,
            "param": self.param,
            "value": self.value,
            "E_exceptional": self.E_exceptional,
            "degeneracy_count": self.degeneracy_count,
            "gap": self.gap,
            "sectors": list(self.sectors),
            "polynomial_evidence": self.polynomial_evidence,
            "other_crossings": [float(v) for v in self.others],
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def _at(params, name, x):
    if name == "phi":
        return params.with_(phi=x)
    return params.with_(**{name: x})


def polynomial_evidence(vec, script_N, params):
    """Tail of ``exp(lambda z / Omega) psi(z)`` beyond degree script_N.

    ``vec`` holds sector Fock amplitudes; ``K_n = v_n / sqrt(n!)`` are the
    Bargmann coefficients.  Returns ``max_{n > N}|c_n| / max_{n <= N}|c_n|``,
    which vanishes for an exactly polynomial factor.
    """
    n = np.arange(len(vec))
    logfact = np.array([math.lgamma(k + 1) for k in n])
    K = vec * np.exp(-0.5 * logfact)
    g = params.lam / params.Omega
    if g > 0:
        terms = np.exp(n * math.log(g) - logfact)
    else:
        terms = (n == 0).astype(float)
    c = np.convolve(K, terms)[: len(vec)]
    head = np.max(np.abs(c[: script_N + 1]))
    # ignore the last few coefficients, which feel the Fock cutoff
    tail = np.max(np.abs(c[script_N + 1: max(script_N + 2, len(c) // 2)]))
    return float(tail / head) if head > 0 else float("inf")


def find_exceptional_crossing(script_N, params_base, sweep, trunc, n_grid=151, xtol=1e-10):
    """Parameter value where a level of H_N meets ``E_exc(script_N)``.

    ``sweep = (name, lo, hi)`` with name one of Delta, lam, phi, Omega.
    Sorted oracle eigenvalues are continuous in the parameter, so each sign
    change of ``E_j(x) - E_exc(x)`` on the grid is refined with Brent's
    method; touching without a sign change is caught by minimising the gap.
    The crossing with the smallest gap is returned; the rest are listed in
    ``others``.
    """
    from .eigensolver import eig_hermitian, eigvalsh, sector_spectra
    from .hamiltonian import build_H
    from .symmetry import block_diagonalize, build_U

    name, lo, hi = sweep
    if name == "lambda":
        name = "lam"
    if name not in SWEEPABLE:
        raise PreconditionError(f"cannot sweep {name!r}; choose from {SWEEPABLE}")
    if not lo < hi:
        raise PreconditionError("sweep range must have lo < hi")
    if n_grid < 3:
        raise PreconditionError("n_grid must be at least 3")

    def Eexc(x):
        p = _at(params_base, name, x)
        return exceptional_energy(script_N, p.Omega, p.lam)

    cache = {}

    def levels(x):
        # H commutes exactly with Pi at any cutoff, so the sorted union of
        # sector spectra is the spectrum of H at a fraction of the cost
        if x not in cache:
            cache[x] = np.sort(np.concatenate(sector_spectra(_at(params_base, name, x), trunc)))
        return cache[x]

    xs = np.linspace(lo, hi, n_grid)
    diffs = np.array([levels(x) - Eexc(x) for x in xs])
    usable = trunc.dim(params_base.N) // 2
    cands = []
    for j in range(usable):
        f = diffs[:, j]
        for i in range(n_grid - 1):
            if f[i] == 0.0:
                cands.append(float(xs[i]))
            elif f[i] * f[i + 1] < 0:
                root = brentq(lambda x: levels(x)[j] - Eexc(x), xs[i], xs[i + 1],
                              xtol=xtol, rtol=4 * np.finfo(float).eps)
                cands.append(float(root))
        if f[-1] == 0.0:
            cands.append(float(xs[-1]))
    gap_grid = np.min(np.abs(diffs[:, :usable]), axis=1)
    cands += [float(xs[0]), float(xs[-1])]
    for i in range(1, n_grid - 1):
        if gap_grid[i] <= gap_grid[i - 1] and gap_grid[i] <= gap_grid[i + 1]:
            res = minimize_scalar(
                lambda x: float(np.min(np.abs(levels(x)[:usable] - Eexc(x)))),
                bounds=(xs[i - 1], xs[i + 1]), method="bounded", options={"xatol": xtol},
            )
            cands.append(float(res.x))

    def gap(x):
        return float(np.min(np.abs(levels(x)[:usable] - Eexc(x))))

    found = sorted({round(x, 12): x for x in cands if gap(x) < CROSSING_GAP}.values())
    if not found:
        best = float(np.min(gap_grid))
        raise NoCrossingFound(
            f"no level reaches E_exc({script_N}) for {name} in [{lo}, {hi}] (min gap {best:.3e})"
        )
    # merge clustered candidates
    merged = []
    for x in found:
        if merged and abs(x - merged[-1]) < 1e-7 * max(1.0, abs(x)):
            if gap(x) < gap(merged[-1]):
                merged[-1] = x
        else:
            merged.append(x)
    best = min(merged, key=gap)
    p = _at(params_base, name, best)
    E_x = Eexc(best)
    vals = eigvalsh(build_H(p, trunc))
    count = int(np.sum(np.abs(vals - E_x) < COUNT_TOL))
    sectors = []
    evidence = None
    fg = build_U(p.N, trunc)
    blocks = block_diagonalize(build_H(p, trunc), fg, p)
    for blk in blocks:
        r = eig_hermitian(blk.matrix, want_vectors=True)
        hits = np.flatnonzero(np.abs(r.values - E_x) < COUNT_TOL)
        for h in hits:
            sectors.append(blk.s)
            ev = polynomial_evidence(r.vectors[:, h], script_N, p)
            evidence = ev if evidence is None else min(evidence, ev)
    return CrossingResult(script_N, name, float(best), float(E_x), count, gap(best), sectors,
                          evidence, [x for x in merged if x != best])
