"""``prbh`` command line: evaluate, simulate, verify and export.

Exit codes: 0 success, 2 usage error, 3 numeric/truncation failure,
4 verification failure.  Machine-readable output (CSV or JSON) goes to
``--output`` when given, otherwise to stdout.  A relative ``--output`` is
resolved against ``$PRBH_OUTPUT_DIR`` if that variable is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import channel_model as cm
from . import density_model as dm
from . import fading_model as fm
from . import state_sim as ss
from .verify import run_suite

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
OUTPUT_DIR_ENV = "PRBH_OUTPUT_DIR"


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def resolve_output(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, text: str, summary: str) -> None:
    if args.output:
        path = resolve_output(args.output)
        write_atomic(path, text)
        print(f"{summary}\nwrote {path}")
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)


# argument types -------------------------------------------------------------

def mass_indicator(text: str) -> float:
    try:
        return cm.MassIndicator(float(text)).z
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def probability_tol(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"tail tolerance must lie in (0, 1), got {text}")
    return v


def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def positive_float(text: str) -> float:
    v = float(text)
    if not (v > 0.0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def seed_int(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {text}")
    return v


def bloch_vector(text: str) -> ss.BlochVector:
    try:
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError("expected three comma-separated components")
        return ss.BlochVector(*parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# commands ---------------------------------------------------------------------

def cmd_pn(args) -> int:
    dist = cm.build_distribution(args.z, args.tail_tol, args.cap)
    if args.format == "json":
        text = to_json({
            "z": dist.z.z,
            "tail_tol": dist.tail_tol,
            "n_max": dist.n_max,
            "probs": list(dist.probs),
            "tail_mass": dist.tail_mass,
        })
    else:
        text = to_csv(["N", "p_N"], [*dist.rows(), ("tail", dist.tail_mass)])
    emit(args, text, f"z={dist.z.z}: {dist.n_max} cloner terms, tail mass {dist.tail_mass:.3e}")
    return EXIT_OK


def cmd_capacity(args) -> int:
    est = cm.capacity_series(args.z, args.tail_tol, args.cap)
    record = {"z": est.z, "value": est.value, "n_terms": est.n_terms, "tail_bound": est.tail_bound}
    if args.format == "json":
        text = to_json(record)
    else:
        text = to_csv(list(record), [list(record.values())])
    emit(args, text, f"Q({est.z}) = {est.value:.15g} ({est.n_terms} terms, remainder <= {est.tail_bound:.2e})")
    return EXIT_OK


def _block_rows(state, system):
    for b in state:
        yield {
            "system": system,
            "k": b.k,
            "dim": b.dim,
            "weight": b.weight,
            "eigenvalues": [float(v) for v in b.eigenvalues()],
        }


def cmd_evolve(args) -> int:
    if args.mixed:
        bob, env = ss.mixed_input_outputs(args.z, args.tail_tol)
        records = [*_block_rows(bob, "B"), *_block_rows(env, "E")]
        tail = bob.tail_mass
        input_desc = "maximally mixed"
        n = [0.0, 0.0, 0.0]
    else:
        state = ss.channel_apply(args.bloch, args.z, args.tail_tol)
        records = list(_block_rows(state, "B"))
        tail = state.tail_mass
        n = args.bloch.as_array().tolist()
        input_desc = f"n={n}"
    if args.format == "json":
        text = to_json({"z": args.z, "bloch": n, "mixed": args.mixed, "tail_mass": tail, "blocks": records})
    else:
        rows = [(r["system"], r["k"], r["dim"], r["weight"], ";".join(fmt(v) for v in r["eigenvalues"])) for r in records]
        text = to_csv(["system", "k", "dim", "weight", "eigenvalues"], rows)
    emit(args, text, f"z={args.z}, input {input_desc}: {len(records)} blocks, tail mass {tail:.3e}")
    return EXIT_OK


GNUPLOT_TEMPLATE = """set datafile separator ','
set key autotitle columnhead
set xlabel 'z'
set ylabel 'f_N(z)'
plot {plots}
"""


def cmd_density(args) -> int:
    if args.gnuplot and not args.output:
        raise UsageError("--gnuplot needs --output")
    ns = args.N
    curves = [dm.density_curve(N, args.steps, args.rate) for N in ns]
    distances = {N: dm.fit_distance(N, None, args.rate) for N in ns}
    if args.format == "json":
        text = to_json({
            "rate": args.rate,
            "z": curves[0].z.tolist(),
            "curves": [{"N": c.N, "f": c.f.tolist(), "argmax": c.argmax(), "fit_distance": distances[c.N]} for c in curves],
        })
    elif len(curves) == 1:
        text = curves[0].to_csv()
    else:
        cols = [curves[0].z] + [c.f for c in curves]
        text = to_csv(["z"] + [f"f_{N}" for N in ns], zip(*cols))
    summary = "; ".join(f"N={c.N}: argmax z={c.argmax():.4g}, L1 fit distance {distances[c.N]:.6f}" for c in curves)
    emit(args, text, summary)
    if args.gnuplot:
        data = resolve_output(args.output)
        plots = ", ".join(f"'{data.name}' using 1:{i + 2} with lines" for i in range(len(curves)))
        write_atomic(data.with_suffix(".gp"), GNUPLOT_TEMPLATE.format(plots=plots))
    return EXIT_OK


def _chunk_sizes(total, parts):
    return [total // parts + (i < total % parts) for i in range(parts)]


def _draw_chunk(stream: fm.RngStream, size: int, args):
    w = fm.sample_complex_gaussian(args.sigma2, stream.child(0), size)
    gammas = fm.draw_unscaled_gammas(args.N, args.sigma2, stream.child(1), size).sum(axis=1)
    phasor = fm.sample_phasor_sum(args.j, args.sigma2, stream.child(2), size).real
    return np.abs(w), np.abs(w) ** 2, gammas, phasor


def cmd_sample(args) -> int:
    workers = args.parallel
    streams = [fm.RngStream(args.seed, i) for i in range(workers)]
    sizes = _chunk_sizes(args.trials, workers)
    if workers == 1:
        chunks = [_draw_chunk(streams[0], sizes[0], args)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda sz: _draw_chunk(sz[0], sz[1], args), zip(streams, sizes)))
    merged = [np.concatenate(parts) for parts in zip(*chunks)]
    specs = [
        ("rayleigh", "|w|", merged[0], None),
        ("exponential", "|w|^2", merged[1], None),
        ("gamma", f"sum of {args.N} Gamma_i", merged[2], args.N),
        ("normal", f"Re phasor sum j={args.j}", merged[3], None),
    ]
    records = []
    for model, quantity, values, shape in specs:
        batch = fm.fit_batch(values, model, args.sigma2, shape)
        crit = batch.critical_value(args.alpha)
        records.append({
            "model": model if shape is None else f"gamma({shape})",
            "quantity": quantity,
            "n": batch.n,
            "sigma2": args.sigma2,
            "ks_statistic": batch.ks_statistic,
            "critical_value": crit,
            "alpha": args.alpha,
            "pass": batch.ks_statistic <= crit,
            "sample_mean": float(np.mean(values)),
        })
    if args.format == "json":
        text = to_json({"seed": args.seed, "trials": args.trials, "parallel": workers, "batches": records})
    else:
        header = list(records[0])
        text = to_csv(header, [[r[h] for h in header] for r in records])
    emit(args, text, "; ".join(f"{r['model']}: KS {r['ks_statistic']:.4f} {'<=' if r['pass'] else '>'} {r['critical_value']:.4f}" for r in records))
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = run_suite(args.z, args.seed, args.trials)
    passed = all(c.passed for c in checks)
    if args.format == "json":
        text = to_json({"z": args.z, "seed": args.seed, "trials": args.trials, "passed": passed,
                        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]})
    else:
        text = to_csv(["check", "passed", "detail"], [(c.name, c.passed, c.detail) for c in checks])
    lines = [c.line() for c in checks]
    lines.append(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    emit(args, text, "\n".join(lines))
    return EXIT_OK if passed else EXIT_VERIFY


# parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prbh", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", default=None, help="output file (atomic write); stdout if omitted")

    series = argparse.ArgumentParser(add_help=False)
    series.add_argument("--z", type=mass_indicator, default=0.5, help="mass indicator, 0 <= z < 1")
    series.add_argument("--tail-tol", type=probability_tol, default=1e-9)
    series.add_argument("--cap", type=positive_int, default=cm.DEFAULT_TERM_CAP, help="hard cap on series terms")

    p = sub.add_parser("pn", parents=[common, series], help="truncated cloner distribution p_N")
    p.set_defaults(func=cmd_pn)

    p = sub.add_parser("capacity", parents=[common, series], help="quantum capacity series")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("evolve", parents=[common, series], help="block channel output for a qubit input")
    p.add_argument("--bloch", type=bloch_vector, default=ss.BlochVector(0.0, 0.0, 1.0),
                   help="unit Bloch vector 'nx,ny,nz' (or 0,0,0 for the mixed input)")
    p.add_argument("--mixed", action="store_true", help="emit sigma_B and sigma_E for the maximally mixed input")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("density", parents=[common], help="chi-square density curves f_N(z)")
    p.add_argument("--N", type=positive_int, nargs="+", default=[1, 2, 3, 4, 5])
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--rate", type=positive_float, default=dm.DEFAULT_RATE)
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script next to --output")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("sample", parents=[common], help="Monte Carlo fading batches with KS fits")
    p.add_argument("--trials", type=positive_int, default=100_000)
    p.add_argument("--seed", type=seed_int, default=42)
    p.add_argument("--sigma2", type=positive_float, default=1.0)
    p.add_argument("--N", type=positive_int, default=4, help="number of Gamma_i summed for the gamma fit")
    p.add_argument("--j", type=positive_int, default=64, help="phasors per sum")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--parallel", type=positive_int, default=1, help="worker streams (part of the deterministic flag set)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--z", type=mass_indicator, default=0.5)
    p.add_argument("--seed", type=seed_int, default=42)
    p.add_argument("--trials", type=positive_int, default=100_000)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "steps", 2) < 2:
        parser.error("--steps must be >= 2")
    try:
        return args.func(args)
    except cm.TruncationCapExceeded as exc:
        print(f"prbh: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError) as exc:
        print(f"prbh: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
