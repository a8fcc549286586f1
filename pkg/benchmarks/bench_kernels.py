"""Compiled vs pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Times the Jacobi eigensolver on random hermitian matrices and a
continued-fraction scan, on both backends, and checks they agree.
"""
import argparse
import time

import numpy as np

from chiral_rabi import ModelParams
from chiral_rabi._kernels import load_backend
from chiral_rabi.symmetry import sector_diagonal


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def jacobi_case(kern, M):
    def run():
        A = np.ascontiguousarray(M.copy())
        V = np.eye(M.shape[0], dtype=complex)
        kern.jacobi_hermitian(A, V, True, 1e-12 * np.linalg.norm(M), 60)
        return np.sort(np.diagonal(A).real)
    return run


def cf_case(kern, params, energies):
    diag = np.ascontiguousarray(sector_diagonal(params, 0))

    def run():
        return kern.cf_spectral(energies, diag, params.Omega, params.lam, 3, 64, 2 ** 16, 1e-12)[0]
    return run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sizes", default="60,120,240")
    args = ap.parse_args()
    try:
        backends = {"cython": load_backend("cython")}
    except ImportError:
        backends = {}
        print("compiled kernels not built; timing the fallback only")
    backends["python"] = load_backend("python")
    rng = np.random.default_rng(7)

    print(f"{'case':<24}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        M = (X + X.conj().T) / 2
        res = {b: best_of(jacobi_case(k, M), args.repeat) for b, k in backends.items()}
        ref = np.linalg.eigvalsh(M)
        for b, (_, vals) in res.items():
            assert np.max(np.abs(vals - ref)) < 1e-9 * np.abs(ref).max(), b
        _report(f"jacobi n={n}", res)

    params = ModelParams.chiral3(1.0, 0.5, 0.3, 0.4)
    E = np.linspace(-1.0, 6.0, 701)
    res = {b: best_of(cf_case(k, params, E), args.repeat) for b, k in backends.items()}
    vals = [v for _, v in res.values()]
    finite = np.isfinite(vals[0])
    assert all(np.allclose(v[finite], vals[0][finite], rtol=1e-10, atol=1e-12) for v in vals)
    _report("cf scan 701 pts", res)


def _report(name, res):
    times = [t for t, _ in res.values()]
    line = f"{name:<24}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
    if len(times) == 2:
        line += f"{times[1] / times[0]:>9.1f}x"
    print(line)


if __name__ == "__main__":
    main()
