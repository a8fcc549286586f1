"""Pure numpy versions of the compiled kernels.

The Jacobi solver here uses the round-robin (tournament) pair ordering so
that each round applies ``n // 2`` disjoint rotations at once with array
operations; a sweep is still a full cycle over every pair.  The continued
fraction evaluator vectorises over the energy grid instead of looping.
"""
import numpy as np


def _round_robin(n):
    """Yield (p, q) index arrays, p < q, covering all pairs once per sweep."""
    m = n + (n % 2)
    players = list(range(m))
    for _ in range(m - 1):
        left = players[: m // 2]
        right = players[m // 2:][::-1]
        p = []
        q = []
        for i, j in zip(left, right):
            if i < n and j < n:
                p.append(min(i, j))
                q.append(max(i, j))
        yield np.array(p, dtype=np.intp), np.array(q, dtype=np.intp)
        players = [players[0]] + [players[-1]] + players[1:-1]


def _offnorm(a):
    # summed directly: ||A||^2 - ||diag||^2 cancels catastrophically
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def jacobi_hermitian(a, v, want_vectors, tol, max_sweeps):
    n = a.shape[0]
    schedule = list(_round_robin(n)) if n > 1 else []
    skip = 1e-3 * tol / max(n, 1)
    sweeps = 0
    off = _offnorm(a)
    while off > tol and sweeps < max_sweeps:
        for P, Q in schedule:
            apq = a[P, Q]
            g = np.abs(apq)
            active = g > skip
            if not active.any():
                continue
            P = P[active]
            Q = Q[active]
            apq = apq[active]
            g = g[active]
            app = a[P, P].real
            aqq = a[Q, Q].real
            e = apq / g
            ec = np.conj(e)
            theta = (aqq - app) / (2.0 * g)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # columns: A <- A G
            colp = a[:, P].copy()
            colq = a[:, Q]
            a[:, P] = colp * c - colq * (s * ec)
            a[:, Q] = colp * s + colq * (c * ec)
            # rows: A <- G^H A
            rowp = a[P, :].copy()
            rowq = a[Q, :]
            a[P, :] = c[:, None] * rowp - (s * e)[:, None] * rowq
            a[Q, :] = s[:, None] * rowp + (c * e)[:, None] * rowq
            a[P, P] = app - t * g
            a[Q, Q] = aqq + t * g
            a[P, Q] = 0.0
            a[Q, P] = 0.0
            if want_vectors:
                colp = v[:, P].copy()
                colq = v[:, Q]
                v[:, P] = colp * c - colq * (s * ec)
                v[:, Q] = colp * s + colq * (c * ec)
        sweeps += 1
        off = _offnorm(a)
    return sweeps, off


def _coef_a(n, energies, diag, omega, lam):
    return (n * omega + diag[n % diag.shape[0]] - energies) / (lam * (n + 1))


def _tail(m, depth, energies, diag, omega, lam):
    s = np.zeros_like(energies)
    for n in range(depth, m, -1):
        s = -(1.0 / (n + 1)) / (_coef_a(n, energies, diag, omega, lam) + s)
    return s


def cf_spectral(energies, diag, omega, lam, m, depth0, depth_max, tol):
    energies = np.ascontiguousarray(energies, dtype=float)
    diag = np.ascontiguousarray(diag, dtype=float)
    npts = energies.shape[0]
    conv = np.zeros(npts, dtype=np.int8)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        depth = depth0
        prev = _tail(m, m + depth, energies, diag, omega, lam)
        cur = prev.copy()
        todo = np.arange(npts)
        while depth < depth_max and todo.size:
            depth *= 2
            new = _tail(m, m + depth, energies[todo], diag, omega, lam)
            cur[todo] = new
            done = np.abs(new - prev[todo]) <= tol * np.maximum(np.abs(new), 1.0)
            conv[todo[done]] = 1
            prev[todo] = new
            todo = todo[~done]
        am = _coef_a(m, energies, diag, omega, lam)
        fwd = np.zeros(npts)
        if m > 0:
            t = -_coef_a(0, energies, diag, omega, lam)
            for n in range(1, m):
                t = -_coef_a(n, energies, diag, omega, lam) - (1.0 / (n + 1)) / t
            fwd = (1.0 / (m + 1)) / t
        F = am + cur + fwd
        P = np.maximum(np.abs(cur), np.abs(fwd))
    return F, cur, P, conv
