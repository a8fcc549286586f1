"""Command-line front end: ``chiral-rabi <command> [options]``.

Exit codes: 0 success, 1 a check or search came back negative, 2 usage or
configuration error, 3 unsupported regime (e.g. continued fractions for
N != 3 or lambda = 0).
"""
import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import (
    ChiralRabiError,
    CouplingZero,
    InvalidParams,
    NoCrossingFound,
    PreconditionError,
    UnsupportedDimension,
)
from .model import ModelParams, Truncation

EXIT_OK, EXIT_NEGATIVE, EXIT_CONFIG, EXIT_UNSUPPORTED = 0, 1, 2, 3


class ConfigError(Exception):
    pass


def fmt(x):
    """Locale-independent 15-significant-digit rendering."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0.0:
            return "0"
        return format(x, ".15g")
    return str(x)


def _round(obj):
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return float(format(f, ".15g")) if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _header(config):
    return (f"# chiral-rabi {config['command']}\n"
            f"# config: {json.dumps(_round(config), sort_keys=True)}\n")


def render_csv(config, columns, rows):
    buf = io.StringIO()
    buf.write(_header(config))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render_json(config, key, payload, **extra):
    doc = {"config": _round(config), key: _round(payload)}
    doc.update({k: _round(v) for k, v in extra.items()})
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write {out}: {exc}") from exc


def _sibling(out, suffix):
    p = Path(out)
    return str(p.with_name(p.stem + suffix))


def read_csv_table(path):
    """Rows (as dicts) of a file written by this tool, skipping ``#`` lines."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# --- argument handling -------------------------------------------------------

INLINE = ("N", "Omega", "Delta", "lam", "phi")


def _range(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    return lo, hi


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _sweep(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected name:lo:hi, got {text!r}")
    try:
        return parts[0], float(parts[1]), float(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sweep bounds in {text!r}") from None


def _model_args(p):
    g = p.add_argument_group("model")
    g.add_argument("--model", help="model JSON document")
    g.add_argument("--N", type=int)
    g.add_argument("--Omega", type=float)
    g.add_argument("--Delta", type=float)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--phi", type=float)
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser():
    parser = argparse.ArgumentParser(prog="chiral-rabi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="oracle spectrum with sector tags")
    _model_args(p)
    p.add_argument("--nmax", type=int, default=80)
    p.add_argument("--levels", type=int, default=20)

    p = sub.add_parser("cfroots", help="continued-fraction roots per sector (N = 3)")
    _model_args(p)
    p.add_argument("--range", type=_range)
    p.add_argument("--step", type=float)
    p.add_argument("--sector", default="all", choices=("0", "1", "2", "all"))
    p.add_argument("--curve", action="store_true", help="also write the sampled F(E)")

    p = sub.add_parser("sweep", help="spectral flow against one parameter")
    _model_args(p)
    p.add_argument("--param", required=True, choices=("lambda", "phi", "Delta", "Omega"))
    p.add_argument("--range", type=_range, required=True)
    p.add_argument("--points", type=int, default=61)
    p.add_argument("--nmax", type=int, default=60)
    p.add_argument("--levels", type=int, default=12)
    p.add_argument("--guides", type=int, default=4, help="highest exceptional index drawn")

    p = sub.add_parser("exceptional", help="locate a level crossing an exceptional energy")
    _model_args(p)
    p.add_argument("--scriptN", type=int, required=True)
    p.add_argument("--sweep", type=_sweep, required=True)
    p.add_argument("--nmax", type=int, default=40)
    p.add_argument("--grid", type=int, default=151)

    p = sub.add_parser("converge", help="truncation convergence table")
    _model_args(p)
    p.add_argument("--nmax", type=_int_list, default=[20, 40, 80])
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--levels", type=int)

    p = sub.add_parser("blocks", help="sector matrices as (row, col, re, im) entries")
    _model_args(p)
    p.add_argument("--nmax", type=int, default=40)
    p.add_argument("--sector", default="all")

    p = sub.add_parser("check", help="cross-validate a roots JSON against a spectrum CSV")
    p.add_argument("--roots", required=True)
    p.add_argument("--spectrum", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    return parser


def resolve_params(args):
    inline = {k: getattr(args, k) for k in INLINE if getattr(args, k, None) is not None}
    if args.model is not None:
        if inline:
            raise ConfigError(f"--model conflicts with inline flags {sorted(inline)}")
        try:
            text = Path(args.model).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {args.model}: {exc}") from exc
        return ModelParams.from_json(text)
    missing = [k for k in ("Omega", "Delta", "lam") if k not in inline]
    if missing:
        raise ConfigError(f"give --model or all of --Omega --Delta --lambda (missing {missing})")
    N = inline.get("N", 3)
    phi = inline.get("phi", 0.0 if N == 3 else None)
    return ModelParams(N=N, Omega=inline["Omega"], Delta=inline["Delta"], lam=inline["lam"], phi=phi)


def _positive(name, value):
    if value is None or not value > 0:
        raise ConfigError(f"{name} must be positive")


# --- commands ----------------------------------------------------------------

def cmd_spectrum(args, params):
    from .eigensolver import eigvalsh, spectrum
    from .hamiltonian import build_H

    _positive("--levels", args.levels)
    trunc = Truncation(args.nmax)
    config = {"command": "spectrum", "model": params.to_dict(), "nmax": args.nmax,
              "levels": args.levels}
    levels = spectrum(params, trunc, args.levels)
    coarse_n = max(args.nmax - max(10, args.nmax // 4), 1)
    coarse = eigvalsh(build_H(params, Truncation(coarse_n)))
    k = min(len(levels), len(coarse))
    drift = max(abs(levels[i].E - coarse[i]) for i in range(k)) if k else 0.0
    if drift > 1e-8:
        sys.stderr.write(
            f"warning: lowest {args.levels} levels move by up to {drift:.3e} between "
            f"n_max {coarse_n} and {args.nmax}; increase --nmax\n"
        )
    if args.format == "json":
        payload = [{"level_index": l.index, "E": l.E, "sector": l.sector, "kind": l.kind,
                    "degeneracy_cluster": l.degeneracy} for l in levels]
        _emit(render_json(config, "levels", payload), args.out)
    else:
        rows = [(l.index, l.E, l.sector, l.kind, l.degeneracy) for l in levels]
        _emit(render_csv(config, ["level_index", "E", "sector", "kind", "degeneracy_cluster"], rows),
              args.out)
    return EXIT_OK


def _default_range(params):
    d = 2 * params.Delta
    lo = -d - params.lam ** 2 / params.Omega - 0.5 * params.Omega
    return lo, lo + 8 * params.Omega


def cmd_cfroots(args, params):
    from .cf import _require_cf, coeff, find_regular_energies

    _require_cf(params)
    step = 0.01 * params.Omega if args.step is None else args.step
    _positive("--step", step)
    lo, hi = args.range if args.range else _default_range(params)
    if not lo < hi:
        raise ConfigError("--range must satisfy lo < hi")
    sectors = [0, 1, 2] if args.sector == "all" else [int(args.sector)]
    config = {"command": "cfroots", "model": params.to_dict(), "range": [lo, hi], "step": step,
              "sectors": sectors}
    scans = [find_regular_energies(s, lo, hi, step, params) for s in sectors]
    roots = [r.to_dict() for sc in scans for r in sc.roots]
    meta = {str(sc.s): sc.meta for sc in scans}
    if args.format == "csv" and args.out:
        cols = ["s", "E", "Re_F", "Im_F", "abs_S0", "flag"]
        for sc in scans:
            # F is assembled in real arithmetic; Im_F is the residue of A_0
            im = coeff(sc.s, 0, 0.0, params)[0].imag
            rows = [(sc.s, E, F, im, S, fl.value)
                    for E, F, S, fl in zip(sc.E_grid, sc.F_values, sc.abs_S0, sc.flags)]
            cfg = dict(config, sector=sc.s)
            _emit(render_csv(cfg, cols, rows), _sibling(args.out, f"_s{sc.s}.csv"))
        _emit(render_json(config, "roots", roots, scan=meta), _sibling(args.out, "_roots.json"))
    else:
        _emit(render_json(config, "roots", roots, scan=meta), args.out)
    if args.curve:
        target = args.out or "cfroots"
        rows = [(sc.s, E, F) for sc in scans for E, F in zip(sc.E_grid, sc.F_values)]
        _emit(render_csv(config, ["s", "E", "F"], rows), _sibling(target, "_curve.csv"))
    return EXIT_OK


def _sweep_params(params, name, x):
    key = "lam" if name == "lambda" else name
    if key == "phi":
        return params.with_(phi=x)
    return params.with_(**{key: x})


def cmd_sweep(args, params):
    from .eigensolver import sector_spectra
    from .exceptional import exceptional_energy

    lo, hi = args.range
    if not lo < hi:
        raise ConfigError("--range must satisfy lo < hi")
    if args.points < 2:
        raise ConfigError("--points must be at least 2")
    _positive("--levels", args.levels)
    trunc = Truncation(args.nmax)
    config = {"command": "sweep", "model": params.to_dict(), "param": args.param,
              "range": [lo, hi], "points": args.points, "nmax": args.nmax, "levels": args.levels}
    rows, guides = [], []
    for x in np.linspace(lo, hi, args.points):
        p = _sweep_params(params, args.param, float(x))
        tagged = sorted((float(E), s) for s, spec in enumerate(sector_spectra(p, trunc)) for E in spec)
        for i, (E, s) in enumerate(tagged[:args.levels]):
            rows.append((x, i, E, s))
        for n in range(args.guides + 1):
            guides.append((x, n, exceptional_energy(n, p.Omega, p.lam)))
    _emit(render_csv(config, ["sweep_value", "level_index", "E", "sector"], rows), args.out)
    gpath = _sibling(args.out, "_guides.csv") if args.out else None
    text = render_csv(config, ["sweep_value", "script_N", "E_guide"], guides)
    if gpath:
        _emit(text, gpath)
    return EXIT_OK


def cmd_exceptional(args, params):
    from .exceptional import find_exceptional_crossing

    config = {"command": "exceptional", "model": params.to_dict(), "scriptN": args.scriptN,
              "sweep": list(args.sweep), "nmax": args.nmax, "grid": args.grid}
    try:
        res = find_exceptional_crossing(args.scriptN, params, args.sweep, Truncation(args.nmax),
                                        n_grid=args.grid)
    except NoCrossingFound as exc:
        sys.stderr.write(f"no crossing: {exc}\n")
        _emit(render_json(config, "result", None), args.out)
        return EXIT_NEGATIVE
    _emit(render_json(config, "result", res.to_dict()), args.out)
    return EXIT_OK


def cmd_converge(args, params):
    from .eigensolver import convergence_study

    _positive("--tol", args.tol)
    config = {"command": "converge", "model": params.to_dict(), "nmax": args.nmax,
              "tol": args.tol, "levels": args.levels}
    rep = convergence_study(params, args.nmax, args.tol, n_levels=args.levels)
    header, rows = rep.to_csv_rows()
    if args.format == "json":
        payload = {"n_max_list": rep.n_max_list, "converged_count": rep.converged_count,
                   "level_table": rep.level_table.tolist(), "drift": rep.drift.tolist()}
        _emit(render_json(config, "result", payload), args.out)
    else:
        _emit(render_csv(config, header, rows), args.out)
    return EXIT_OK


def cmd_blocks(args, params):
    from .hamiltonian import build_H
    from .symmetry import block_diagonalize, build_U

    trunc = Truncation(args.nmax)
    if args.sector == "all":
        sectors = list(range(params.N))
    else:
        try:
            sectors = [int(args.sector)]
        except ValueError:
            raise ConfigError(f"--sector must be an integer or 'all', got {args.sector!r}") from None
        if not 0 <= sectors[0] < params.N:
            raise ConfigError(f"--sector must be in 0..{params.N - 1}")
    blocks = block_diagonalize(build_H(params, trunc), build_U(params.N, trunc), params)
    config = {"command": "blocks", "model": params.to_dict(), "nmax": args.nmax,
              "sectors": sectors}
    rows = []
    for s in sectors:
        M = blocks[s].matrix
        for i, j in zip(*np.nonzero(np.abs(M) > 1e-15 * np.abs(M).max())):
            rows.append((s, i, j, M[i, j].real, M[i, j].imag))
    _emit(render_csv(config, ["s", "row", "col", "re", "im"], rows), args.out)
    return EXIT_OK


def cmd_check(args):
    """Every root must match a spectrum level of the same sector, and every
    regular spectrum level inside the scanned range must have a root."""
    try:
        doc = json.loads(Path(args.roots).read_text(encoding="utf-8"))
        table = read_csv_table(args.spectrum)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read inputs: {exc}") from exc
    roots = doc["roots"] if isinstance(doc, dict) else doc
    lo, hi = doc["config"]["range"] if isinstance(doc, dict) else (-math.inf, math.inf)
    sectors = set(doc["config"].get("sectors", [0, 1, 2])) if isinstance(doc, dict) else {0, 1, 2}
    levels = [(float(r["E"]), int(r["sector"]), r["kind"]) for r in table]
    top = max(E for E, _, _ in levels)
    bad = 0
    for r in roots:
        if r["E"] > top + args.tol:
            continue
        if not any(s == r["s"] and abs(E - r["E"]) < args.tol for E, s, _ in levels):
            sys.stderr.write(f"root s={r['s']} E={r['E']} has no matching level\n")
            bad += 1
    for E, s, kind in levels:
        if s not in sectors or not (lo <= E <= hi):
            continue
        if not any(s == r["s"] and abs(E - r["E"]) < args.tol for r in roots):
            sys.stderr.write(f"level s={s} E={E} ({kind}) has no root\n")
            bad += 1
    sys.stdout.write(f"checked {len(roots)} roots against {len(levels)} levels: "
                     f"{'ok' if not bad else f'{bad} mismatches'}\n")
    return EXIT_OK if not bad else EXIT_NEGATIVE


COMMANDS = {
    "spectrum": cmd_spectrum,
    "cfroots": cmd_cfroots,
    "sweep": cmd_sweep,
    "exceptional": cmd_exceptional,
    "converge": cmd_converge,
    "blocks": cmd_blocks,
}


def _glue_values(argv):
    """``--range -1:5`` -> ``--range=-1:5`` so negative bounds parse."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--range", "--sweep"):
            val = next(it, None)
            out.append(tok if val is None else f"{tok}={val}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(_glue_values(sys.argv[1:] if argv is None else list(argv)))
    try:
        if args.command == "check":
            return cmd_check(args)
        params = resolve_params(args)
        return COMMANDS[args.command](args, params)
    except (UnsupportedDimension, CouplingZero) as exc:
        hint = " (lambda = 0 is solved in closed form: E = Omega n + d_k)" \
            if isinstance(exc, CouplingZero) else ""
        sys.stderr.write(f"unsupported: {exc}{hint}\n")
        return EXIT_UNSUPPORTED
    except (ConfigError, InvalidParams, PreconditionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except ChiralRabiError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
