"""Regular energies of the N = 3 model from continued fractions.

In sector s the Bargmann coefficients obey

    K_1 + A_0 K_0 = 0,   K_{n+1} + A_n K_n + B_n K_{n-1} = 0  (n >= 1),

with ``A_n = (n Omega + d_{n+s} - E) / (lambda (n+1))`` and ``B_n = 1/(n+1)``.
Backward recursion from a zero tail gives the minimal-solution ratio
``S_n = K_{n+1}/K_n``; energies are the zeros of ``F(E) = S_0 + A_0``.

``F`` equals ``1 / (lambda G_00(E))`` where ``G_00`` is the vacuum element
of the sector resolvent, so it is real, strictly decreasing between poles,
and a level whose eigenvector has a tiny vacuum amplitude produces a zero
that sits within that amplitude squared of a pole.  Such zeros cannot be
bracketed in double precision.  The scan therefore also samples the
inverted functions

    F_m(E) = A_m + S_m + B_m / T_m,   T_m = K_m / K_{m-1} (forward from n = 0),

which share the zeros of ``F`` but condition the level whose eigenvector
peaks at Fock index m.  Certification of a zero against the n = 0
boundary relation is done in extended precision (:func:`minimal_solution`).
"""
from dataclasses import dataclass, field
from enum import Enum
import math

import mpmath
import numpy as np

from . import _kernels
from .clock import omega_pow
from .errors import (
    CouplingZero,
    NotAnEigenvalue,
    PreconditionError,
    UnsupportedDimension,
)
from .exceptional import exceptional_energy, indicial_exponent
from .symmetry import sector_diagonal

CF_TOL = 1e-12
DEPTH0 = 64
DEPTH_MAX = 2 ** 16
POLE_THRESHOLD = 1e6
ROOT_TOL = 1e-8
EXCEPTIONAL_WINDOW = 1e-6


class Flag(str, Enum):
    REGULAR = "Regular"
    NEAR_POLE = "NearPole"
    NOT_CONVERGED = "NotConverged"


def _require_cf(params):
    if params.N != 3:
        raise UnsupportedDimension("the continued-fraction solver is implemented for N = 3")
    if params.lam <= 0:
        raise CouplingZero("lambda = 0: use the decoupled closed form instead")


def coeff(s, n, E, params):
    """Recurrence coefficients ``(A_n, B_n)`` of sector s at energy E.

    ``A_n`` is evaluated from the complex expression; its imaginary part
    vanishes up to rounding because the couplings are conjugate-paired.
    """
    _require_cf(params)
    k = n + s
    level = params.alpha(2) * omega_pow(3, k) + params.alpha(1) * omega_pow(3, 2 * k)
    A = (n * params.Omega + params.Delta * level - E) / (params.lam * (n + 1))
    return complex(A), 1.0 / (n + 1)


@dataclass(frozen=True)
class RecurrenceCoeffs:
    """Generator of the real recurrence coefficients for one sector."""

    s: int
    params: object

    def __post_init__(self):
        _require_cf(self.params)

    @property
    def diag(self):
        return sector_diagonal(self.params, self.s)

    def A(self, n, E):
        p = self.params
        return (n * p.Omega + self.diag[n % 3] - E) / (p.lam * (n + 1))

    @staticmethod
    def B(n):
        return 1.0 / (n + 1)


def spectral_function(s, energies, params, m=0, cf_tol=CF_TOL, depth0=DEPTH0,
                      depth_max=DEPTH_MAX):
    """Vectorised ``F_m`` on an energy array.

    Returns ``(F, S_m, pole_measure, converged)``; ``m = 0`` is the
    spectral function ``F = S_0 + A_0`` itself.
    """
    _require_cf(params)
    E = np.atleast_1d(np.asarray(energies, dtype=float))
    diag = np.ascontiguousarray(sector_diagonal(params, s))
    F, S, P, C = _kernels.cf_spectral(
        np.ascontiguousarray(E), diag, params.Omega, params.lam, int(m), int(depth0),
        int(depth_max), float(cf_tol),
    )
    return np.asarray(F), np.asarray(S), np.asarray(P), np.asarray(C).astype(bool)


def eval_S0(s, E, params, cf_tol=CF_TOL, depth0=DEPTH0, depth_max=DEPTH_MAX):
    """Continued fraction ``S_0`` by backward recursion with depth doubling.

    Returns ``(S0, converged)``; converged is False if the depth cap was hit.
    """
    _, S, _, C = spectral_function(s, [E], params, 0, cf_tol, depth0, depth_max)
    return complex(S[0]), bool(C[0])


def spectral_F(s, E, params, pole_threshold=POLE_THRESHOLD):
    """``F(E) = S_0 + A_0`` with a sample flag."""
    F, S, _, C = spectral_function(s, [E], params, 0)
    if not C[0]:
        flag = Flag.NOT_CONVERGED
    elif abs(S[0]) > pole_threshold:
        flag = Flag.NEAR_POLE
    else:
        flag = Flag.REGULAR
    return complex(F[0]), flag


@dataclass
class CFRoot:
    s: int
    E: float
    residual: float
    bracket_lo: float
    bracket_hi: float
    inversion: int
    pole_measure: float
    f0_residual: float = None
    near_exceptional: bool = False

    def to_dict(self):
        return {
            "s": self.s,
            "E": self.E,
            "residual": self.residual,
            "bracket_lo": self.bracket_lo,
            "bracket_hi": self.bracket_hi,
            "inversion": self.inversion,
            "near_exceptional": self.near_exceptional,
        }


@dataclass
class SpectralScan:
    s: int
    E_grid: np.ndarray
    F_values: np.ndarray
    abs_S0: np.ndarray
    flags: list
    roots: list
    meta: dict = field(default_factory=dict)

    @property
    def energies(self):
        return np.array([r.E for r in self.roots])


def _grid(lo, hi, step):
    n = int(math.floor((hi - lo) / step + 1e-9))
    g = lo + step * np.arange(n + 1)
    if g[-1] < hi - 1e-12 * max(1.0, abs(hi)):
        g = np.append(g, hi)
    return g


def default_inversions(params, s, E_hi):
    """Highest inversion index worth scanning for energies up to E_hi."""
    d = sector_diagonal(params, s)
    ground = float(np.min(d)) - params.lam ** 2 / params.Omega
    return int(min(400, max(3, math.ceil((E_hi - ground) / params.Omega) + 3)))


class _Scanner:
    def __init__(self, s, params, root_tol, pole_threshold, cf_tol, max_subdiv=3):
        self.s = s
        self.params = params
        self.root_tol = root_tol
        self.pole_threshold = pole_threshold
        self.cf_tol = cf_tol
        self.max_subdiv = max_subdiv
        self.unresolved = 0

    def values(self, E, m):
        F, _, P, C = spectral_function(self.s, E, self.params, m, self.cf_tol)
        ok = C & np.isfinite(F)
        return F, P, ok

    def brackets(self, grid, m, level=0):
        """Root brackets ``(lo, hi)`` of F_m on a grid; F_m falls through zero."""
        F, _, ok = self.values(grid, m)
        out = []
        for i in range(len(grid) - 1):
            if not (ok[i] and ok[i + 1]):
                continue
            a, b = F[i], F[i + 1]
            if a == 0.0:
                out.append((grid[i], grid[i]))
            elif a > 0.0 > b:
                out.append((grid[i], grid[i + 1]))
            elif b > a and (a > 0) == (b > 0):
                # a pole without a sign change hides a zero in the same cell
                if level < self.max_subdiv:
                    sub = np.linspace(grid[i], grid[i + 1], 5)
                    out.extend(self.brackets(sub, m, level + 1))
                else:
                    self.unresolved += 1
        return out

    def bisect(self, brackets, m):
        lo = np.array([b[0] for b in brackets], dtype=float)
        hi = np.array([b[1] for b in brackets], dtype=float)
        for _ in range(200):
            width = hi - lo
            live = width > 1e-13 * np.maximum(1.0, np.abs(lo))
            if not live.any():
                break
            mid = 0.5 * (lo + hi)
            live &= (mid > lo) & (mid < hi)
            if not live.any():
                break
            Fm, _, _ = self.values(mid[live], m)
            idx = np.flatnonzero(live)
            pos = Fm > 0.0
            lo[idx[pos]] = mid[idx[pos]]
            hi[idx[~pos]] = mid[idx[~pos]]
        Flo, Plo, _ = self.values(lo, m)
        Fhi, Phi, _ = self.values(hi, m)
        roots = []
        for j in range(len(lo)):
            E, res = (lo[j], abs(Flo[j])) if abs(Flo[j]) <= abs(Fhi[j]) else (hi[j], abs(Fhi[j]))
            pole = max(Plo[j], Phi[j])
            if res < self.root_tol and pole < self.pole_threshold and np.isfinite(res):
                roots.append(CFRoot(self.s, float(E), float(res), float(lo[j]), float(hi[j]), m,
                                    float(pole)))
        return roots

    def scan(self, grid, inversions):
        found = []
        for m in range(inversions + 1):
            br = self.brackets(grid, m)
            if br:
                found.extend(self.bisect(br, m))
        return found


def _merge(cands, tol=1e-8):
    cands = sorted(cands, key=lambda r: r.E)
    out = []
    for r in cands:
        if out and abs(r.E - out[-1].E) <= tol * max(1.0, abs(r.E)):
            if r.residual < out[-1].residual:
                out[-1] = r
        else:
            out.append(r)
    return out


def find_regular_energies(s, E_lo, E_hi, grid_step, params, inversions=None,
                          root_tol=ROOT_TOL, pole_threshold=POLE_THRESHOLD, cf_tol=CF_TOL):
    """Zeros of the sector-s spectral function in ``[E_lo, E_hi]``.

    Samples F (and its inversions ``F_1..F_M``) on a grid of spacing
    ``grid_step``, brackets downward zero crossings (upward crossings are
    poles, since F decreases between poles), subdivides cells where F rises
    without changing sign, bisects, and re-scans at a quarter of the step
    around roots closer than three steps.
    """
    _require_cf(params)
    if not E_lo < E_hi:
        raise PreconditionError(f"empty energy range [{E_lo}, {E_hi}]")
    if not grid_step > 0:
        raise PreconditionError("grid_step must be positive")
    grid = _grid(E_lo, E_hi, grid_step)
    F0, S0, P0, C0 = spectral_function(s, grid, params, 0, cf_tol)
    flags = [
        Flag.NOT_CONVERGED if not c else Flag.NEAR_POLE if abs(x) > pole_threshold else Flag.REGULAR
        for x, c in zip(S0, C0)
    ]
    M = default_inversions(params, s, E_hi) if inversions is None else int(inversions)
    scanner = _Scanner(s, params, root_tol, pole_threshold, cf_tol)
    roots = _merge(scanner.scan(grid, M))
    close = [(a, b) for a, b in zip(roots, roots[1:]) if b.E - a.E < 3 * grid_step]
    for a, b in close:
        fine = _grid(max(E_lo, a.E - grid_step), min(E_hi, b.E + grid_step), grid_step / 4)
        roots = _merge(roots + scanner.scan(fine, M))
    lo_edge = E_lo - 1e-12 * max(1.0, abs(E_lo))
    hi_edge = E_hi + 1e-12 * max(1.0, abs(E_hi))
    roots = [r for r in roots if lo_edge <= r.E <= hi_edge]
    if roots:
        f0 = spectral_function(s, [r.E for r in roots], params, 0, cf_tol)[0]
        for r, v in zip(roots, f0):
            r.f0_residual = float(abs(v))
            r.near_exceptional = is_near_exceptional(r.E, params)
    meta = {
        "grid_step": grid_step,
        "inversions": M,
        "unresolved_cells": scanner.unresolved,
        "close_pairs_rescanned": len(close),
        "backend": _kernels.BACKEND,
    }
    return SpectralScan(s, grid, F0, np.abs(S0), flags, roots, meta)


def is_near_exceptional(E, params, window=EXCEPTIONAL_WINDOW):
    rho = indicial_exponent(E, params.Omega, params.lam)
    k = round(rho)
    return k >= 0 and abs(E - exceptional_energy(k, params.Omega, params.lam)) < window


# --- minimal solution, extended precision -----------------------------------

@dataclass
class MinimalSolution:
    s: int
    E: float
    K: np.ndarray
    tail_ratio_check: bool
    relation_residual: float
    norm_plateau: float
    n_asym: int
    inversion: int
    E_input: float = None
    polished: bool = False


def _dominant_index(s, E, params, n_top):
    """Fock index where the CF minimal solution (as amplitudes) peaks."""
    diag = sector_diagonal(params, s)
    S = np.zeros(n_top + 1)
    acc = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        for n in range(n_top + 64, 0, -1):
            A = (n * params.Omega + diag[n % 3] - E) / (params.lam * (n + 1))
            acc = -(1.0 / (n + 1)) / (A + acc)
            if n - 1 <= n_top:
                S[n - 1] = acc
        logk = np.concatenate([[0.0], np.cumsum(np.log(np.abs(S[:-1])))])
    weight = 2 * logk + np.array([math.lgamma(n + 1) for n in range(n_top + 1)])
    weight[~np.isfinite(weight)] = -np.inf
    return int(np.argmax(weight))


class _MP:
    """Extended-precision recurrence for one sector (call inside workdps)."""

    def __init__(self, s, params):
        self.diag = [mpmath.mpf(float(x)) for x in sector_diagonal(params, s)]
        self.Om = mpmath.mpf(params.Omega)
        self.lam = mpmath.mpf(params.lam)

    def A(self, n, E):
        return (n * self.Om + self.diag[n % 3] - E) / (self.lam * (n + 1))

    def tails(self, E, n_top, depth):
        """``[S_0, ..., S_{n_top}]`` by backward recursion from n_top + depth."""
        S = [mpmath.mpf(0)] * (n_top + 1)
        acc = mpmath.mpf(0)
        for n in range(n_top + depth, 0, -1):
            acc = -mpmath.mpf(1) / (n + 1) / (self.A(n, E) + acc)
            if n - 1 <= n_top:
                S[n - 1] = acc
        return S

    def converged_depth(self, E, n_top, eps):
        """Smallest doubled depth at which S_0 and S_{n_top} are stable to eps."""
        depth = DEPTH0
        prev = self.tails(E, n_top, depth)
        while depth < DEPTH_MAX:
            cur = self.tails(E, n_top, 2 * depth)
            if all(abs(c - p) <= eps * max(1, abs(c)) for c, p in ((cur[0], prev[0]), (cur[-1], prev[-1]))):
                return 2 * depth
            depth, prev = 2 * depth, cur
        return depth

    def F(self, m, E, depth):
        val = self.A(m, E) + self.tails(E, m, depth)[m]
        if m > 0:
            t = -self.A(0, E)
            for n in range(1, m):
                t = -self.A(n, E) - mpmath.mpf(1) / (n + 1) / t
            val += mpmath.mpf(1) / (m + 1) / t
        return val


def minimal_solution(s, E, params, n_max=100, dps=50, polish_window=1e-8):
    """Minimal solution ``K_0 = 1, K_{n+1} = S_n K_n`` at an energy root.

    The energy is first polished in ``dps``-digit arithmetic on the best
    conditioned inversion, provided a zero lies within ``polish_window``
    (relative) of E; the n = 0 relation ``K_1 + A_0 K_0 = 0`` is then
    checked and :class:`NotAnEigenvalue` raised if it fails by more than
    1e-6.  ``tail_ratio_check`` tests ``|K_{n+1}/K_n| < 2 lambda / (Omega n)``
    beyond the asymptotic index.
    """
    _require_cf(params)
    diag = sector_diagonal(params, s)
    n_asym = max(10, math.ceil(2 * (abs(E) + float(np.max(np.abs(diag)))) / params.Omega) + 1)
    n_max = max(n_max, n_asym + 20)
    m = _dominant_index(s, E, params, n_max)
    polished = False
    with mpmath.workdps(dps):
        mp = _MP(s, params)
        eps = mpmath.mpf(10) ** (-(dps - 10))
        Emp = mpmath.mpf(E)
        h = mpmath.mpf(polish_window) * max(1, abs(Emp))
        a, b = Emp - h, Emp + h
        # E moves by at most h while polishing, so one depth serves throughout
        depth = mp.converged_depth(Emp, m, eps)
        f = lambda x: mp.F(m, x, depth)
        if f(a) > 0 > f(b):
            root = mpmath.findroot(f, (a, b), solver="illinois", verify=False)
            if a <= root <= b:
                Emp = root
                polished = True
        depth = mp.converged_depth(Emp, n_max, eps)
        S = mp.tails(Emp, n_max, depth)
        K = [mpmath.mpf(1)]
        for n in range(n_max):
            K.append(K[-1] * S[n])
        relation = abs(K[1] + mp.A(0, Emp) * K[0])
        if relation > 1e-6:
            raise NotAnEigenvalue(
                f"n = 0 relation violated by {mpmath.nstr(relation, 5)} at E = {float(Emp)!r}"
            )
        bound_ok = all(
            abs(K[n + 1] / K[n]) < 2 * params.lam / (params.Omega * n)
            for n in range(n_asym, n_max)
        )
        partial = mpmath.mpf(0)
        sums = []
        for n, k in enumerate(K):
            partial += k * k * mpmath.factorial(n)
            sums.append(partial)
        plateau = (sums[-1] - sums[-11]) / sums[-1]
        return MinimalSolution(
            s, float(Emp), np.array([float(k) for k in K]), bool(bound_ok), float(relation),
            float(plateau), n_asym, m, float(E), polished,
        )


@dataclass
class DominantCheck:
    window: tuple
    ratios: np.ndarray
    max_deviation: float

    @property
    def ok(self):
        return self.max_deviation < 0.05


def forward_ratios(s, E, params, n_top):
    """``K_{n+1}/K_n`` for n = 0..n_top by plain forward recursion from K_0 = 1."""
    diag = sector_diagonal(params, s)
    n = np.arange(n_top + 1)
    A = (n * params.Omega + diag[n % 3] - E) / (params.lam * (n + 1))
    r = np.empty(n_top + 1)
    r[0] = -A[0]
    for k in range(1, n_top + 1):
        r[k] = -A[k] - 1.0 / (k + 1) / r[k - 1]
    return r


def dominant_branch_check(s, E, params, n_lo=None):
    """Compare forward-recursion ratios with the dominant asymptote -Omega/lambda.

    ``A_n`` approaches ``Omega/lambda`` only like ``1 - (1 + (E - d)/Omega)/n``,
    so the default window starts where that correction is about 2.5%.
    """
    _require_cf(params)
    dmax = float(np.max(np.abs(sector_diagonal(params, s))))
    if n_lo is None:
        scale = abs(E) + dmax + params.Omega + params.lam ** 2 / params.Omega
        n_lo = max(50, math.ceil(40 * scale / params.Omega))
    n_hi = 2 * n_lo
    r = forward_ratios(s, E, params, n_hi)
    target = -params.Omega / params.lam
    window = r[n_lo:n_hi + 1]
    return DominantCheck((n_lo, n_hi), window, float(np.max(np.abs(window / target - 1.0))))
