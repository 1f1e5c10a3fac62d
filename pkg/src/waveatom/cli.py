"""Command line entry point: ``waveatom <verb> [options]``.

Verbs: compress, table, pattern, solve, apply-bench, info.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import csv
import io
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import geometry
from .kernels import KINDS, assemble, default_size
from .nsform import (
    analyze,
    compress,
    estimate_l2_error,
    load_nsf,
    save_nsf,
    sparsity_pattern,
    write_pgm,
)
from .solver import ConvergenceError, IncidentWave, bistatic_rcs, far_field, solve_bie

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

REPORT_COLUMNS = ["shape", "kernel", "k", "N", "epsilon", "delta", "nnz", "per_row", "eps_l2", "seconds"]
BENCH_COLUMNS = ["k", "N", "epsilon", "nnz", "t_dense_ms", "t_sparse_ms", "speedup"]
SOLVE_COLUMNS = ["incident_angle", "mode", "N", "eta", "iterations", "final_residual", "density_norm",
                 "theta", "rcs", "rcs_db"]


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

_EPS_FRACTIONAL = re.compile(r"^\s*(\d+(?:\.\d*)?)?e([-+]?\d+(?:\.\d+)?)\s*$", re.IGNORECASE)


def parse_epsilon(text):
    """Float or 'MeX' with a fractional exponent, e.g. '1e-1.5' -> 10**-1.5."""
    try:
        value = float(text)
    except ValueError:
        match = _EPS_FRACTIONAL.match(text)
        if not match:
            raise ConfigError(f"cannot parse epsilon {text!r}") from None
        mant = float(match.group(1) or 1.0)
        value = mant * 10.0 ** float(match.group(2))
    if not 0 < value < 1:
        raise ConfigError(f"epsilon must lie in (0, 1), got {text!r}")
    return value


def parse_list(text, convert):
    if text is None or text.strip() == "":
        return []
    return [convert(part.strip()) for part in text.split(",") if part.strip()]


def parse_k(text):
    try:
        k = float(text)
    except ValueError:
        raise ConfigError(f"cannot parse wavenumber {text!r}") from None
    if not k > 0:
        raise ConfigError(f"wavenumber must be positive, got {text!r}")
    return int(k) if k == int(k) else k


_SHAPE = re.compile(r"^\s*(ellipse|kite|star|file)\s*(?:\((.*)\))?\s*$")


def parse_shape(text):
    """'kite', 'ellipse(1,0.5)', 'star(5,0.3)', 'file(path.json)' or a bare .json path."""
    if text.endswith(".json") and "(" not in text:
        text = f"file({text})"
    match = _SHAPE.match(text)
    if not match:
        raise ConfigError(f"unknown shape {text!r}")
    name, args = match.group(1), match.group(2)
    try:
        if name == "file":
            if not args:
                raise ConfigError("file() needs a path")
            curve = geometry.load_curve(args)
            return curve, f"file({args})"
        params = [float(a) for a in args.split(",")] if args else []
        if name == "ellipse":
            a, b = params if params else (1.0, 0.5)
            return geometry.make_ellipse(a, b), f"ellipse({a:g},{b:g})"
        if name == "kite":
            if params:
                raise ConfigError("kite takes no parameters")
            return geometry.make_kite(), "kite"
        p, amp = params if params else (5, 0.3)
        return geometry.make_star(p, amp), f"star({int(p)},{amp:g})"
    except (OSError, KeyError) as exc:
        raise ConfigError(f"cannot load shape {text!r}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid shape {text!r}: {exc}") from exc


def parse_size(text, k):
    if text in (None, "auto"):
        return default_size(k)
    try:
        N = int(text)
    except ValueError:
        raise ConfigError(f"--n must be an integer or 'auto', got {text!r}") from None
    if N < 16 or N & (N - 1):
        raise ConfigError(f"--n must be a power of two >= 16, got {N}")
    return N


def parse_eta(text, k, kernel):
    if kernel != "combined":
        return 0.0
    if text in (None, "auto"):
        return float(k)
    try:
        eta = float(text)
    except ValueError:
        raise ConfigError(f"--eta must be a number or 'auto', got {text!r}") from None
    if eta < 0:
        raise ConfigError("--eta must be nonnegative")
    return eta


def resolve_threads(value):
    if value is None:
        value = os.environ.get("WAVEATOM_THREADS", "1")
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"thread count must be an integer, got {value!r}") from None
    if n < 1:
        raise ConfigError("thread count must be at least 1")
    return n


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    shape: str
    curve: object = field(repr=False)
    k: float
    N: int
    kernel: str
    eta: float
    epsilons: list
    seed: int = 0
    out: str = None
    threads: int = 1
    timing: bool = True
    eps_labels: list = None

    @property
    def kernel_label(self):
        return f"combined(eta={self.eta:g})" if self.kernel == "combined" else self.kernel


def build_config(args, k=None):
    curve, shape = parse_shape(args.shape)
    k = parse_k(args.k) if k is None else k
    if args.kernel not in KINDS:
        raise ConfigError(f"unknown kernel {args.kernel!r}")
    labels = parse_list(getattr(args, "eps", None), str)
    return RunConfig(
        shape=shape, curve=curve, k=k, N=parse_size(args.n, k), kernel=args.kernel,
        eta=parse_eta(args.eta, k, args.kernel), epsilons=[parse_epsilon(e) for e in labels],
        seed=args.seed, out=args.out, threads=resolve_threads(args.threads),
        timing=not getattr(args, "no_timing", False), eps_labels=labels,
    )


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _report_rows(cfg):
    """Assemble once, analyze once, then one row (and form) per epsilon."""
    t0 = time.perf_counter()
    kernel = assemble(cfg.curve, cfg.kernel, cfg.k, cfg.N, cfg.eta if cfg.kernel == "combined" else None)
    coeffs = analyze(kernel)
    setup = time.perf_counter() - t0
    for eps in cfg.epsilons:
        t1 = time.perf_counter()
        form = compress(coeffs, eps, kernel)
        est = estimate_l2_error(form, kernel, seed=cfg.seed)
        seconds = setup + time.perf_counter() - t1 if cfg.timing else 0.0
        row = [cfg.shape, cfg.kernel_label, _fmt(cfg.k), cfg.N, _fmt(eps), f"{form.delta:.6e}",
               form.nnz, f"{form.per_row:.4f}", f"{est.random_max:.6e}", f"{seconds:.3f}"]
        yield row, form


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _nsf_path(base, label, multiple):
    if not multiple:
        return base
    p = Path(base)
    return str(p.with_name(f"{p.stem}_eps{label}{p.suffix or '.nsf'}"))


def cmd_compress(args):
    cfg = build_config(args)
    if not cfg.epsilons:
        raise ConfigError("compress needs at least one --eps value")
    fh, close = _open_out(args.csv)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for (row, form), label in zip(_report_rows(cfg), cfg.eps_labels):
            if cfg.out:
                save_nsf(form, _nsf_path(cfg.out, label, len(cfg.epsilons) > 1))
            writer.writerow(row)
            fh.flush()
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_table(args):
    ks = parse_list(args.k, parse_k)
    base = build_config(args, k=ks[0]) if ks else None
    if base is not None and not base.epsilons:
        raise ConfigError("table needs at least one --eps value")
    configs = [replace(base, k=k, N=parse_size(args.n, k), eta=parse_eta(args.eta, k, args.kernel))
               for k in ks]
    fh, close = _open_out(args.out)
    status = EXIT_OK
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        fh.flush()
        threads = base.threads if base else 1
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(lambda c: [row for row, _ in _report_rows(c)], c) for c in configs]
            for fut in futures:  # deterministic order
                try:
                    rows = fut.result()
                except (ArithmeticError, np.linalg.LinAlgError, MemoryError) as exc:
                    print(f"error: {exc}", file=sys.stderr)
                    status = EXIT_NUMERIC
                    break
                writer.writerows(rows)
                fh.flush()
    finally:
        if close:
            fh.close()
    return status


def cmd_pattern(args):
    if args.nsf:
        form = load_nsf(args.nsf)
    else:
        cfg = build_config(args)
        if len(cfg.epsilons) != 1:
            raise ConfigError("pattern needs exactly one --eps value (or --nsf)")
        kernel = assemble(cfg.curve, cfg.kernel, cfg.k, cfg.N, cfg.eta if cfg.kernel == "combined" else None)
        form = compress(analyze(kernel), cfg.epsilons[0], kernel)
    if not args.out:
        raise ConfigError("pattern needs --out for the PGM image")
    img = sparsity_pattern(form)
    write_pgm(img, args.out)
    print(f"wrote {args.out}: {img.shape[1]}x{img.shape[0]}, {int((img == 0).sum())} black pixels")
    return EXIT_OK


def cmd_solve(args):
    curve, shape = parse_shape(args.shape)
    k = parse_k(args.k)
    N = parse_size(args.n, k)
    eta = float(k) if args.eta in (None, "auto") else parse_eta(args.eta, k, "combined")
    angles = parse_list(args.angle, float)
    if not angles:
        raise ConfigError("solve needs at least one --angle")
    if args.mode == "compressed":
        eps_list = parse_list(args.eps, parse_epsilon) or [1e-2]
        eps = eps_list[0]
    else:
        eps = None
    theta = np.linspace(0, 2 * np.pi, args.samples, endpoint=False)

    from .kernels import assemble_combined  # local: keeps the verb table readable

    kernel = assemble_combined(curve, k, N, eta)
    form = compress(analyze(kernel), eps, kernel) if eps else None
    fh, close = _open_out(args.out)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SOLVE_COLUMNS)
        for ang in angles:
            wave = IncidentWave.from_angle(ang, k)
            res = solve_bie(curve, k, wave, mode=args.mode, tol=args.tol, maxit=args.maxit, N=N, eta=eta,
                            kernel=kernel, form=form)
            rcs = bistatic_rcs(far_field(curve, res.density, k, eta, theta))
            dn = float(np.linalg.norm(res.density) / np.sqrt(N))
            for th, lin, db in zip(theta, rcs.linear, rcs.db):
                writer.writerow([_fmt(float(ang)), res.applied_operator, N, _fmt(eta), res.iterations,
                                 f"{res.residual_history[-1]:.3e}", f"{dn:.6e}", f"{th:.6f}",
                                 f"{lin:.6e}", f"{db:.4f}"])
    finally:
        if close:
            fh.close()
    print(f"# {shape} k={_fmt(k)} N={N}", file=sys.stderr)
    return EXIT_OK


def cmd_apply_bench(args):
    cfg = build_config(args)
    eps = cfg.epsilons[0] if cfg.epsilons else 1e-2
    kernel = assemble(cfg.curve, cfg.kernel, cfg.k, cfg.N, cfg.eta if cfg.kernel == "combined" else None)
    form = compress(analyze(kernel), eps, kernel)
    rng = np.random.default_rng(cfg.seed)
    f = rng.standard_normal(cfg.N) + 1j * rng.standard_normal(cfg.N)
    dense = kernel.values
    form.apply(f)  # build the coupling matrix outside the timed region

    def best(fn):
        times = []
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        return 1e3 * min(times)

    t_dense = best(lambda: dense @ f)
    t_sparse = best(lambda: form.apply(f))
    fh, close = _open_out(args.out)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BENCH_COLUMNS)
        writer.writerow([_fmt(cfg.k), cfg.N, _fmt(eps), form.nnz, f"{t_dense:.3f}", f"{t_sparse:.3f}",
                         f"{t_dense / t_sparse:.3f}"])
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_info(args):
    form = load_nsf(args.file)
    lines = [
        ("kind", form.kind), ("k", _fmt(form.k)), ("N", form.N), ("eta", _fmt(form.eta)),
        ("epsilon", _fmt(form.epsilon)), ("delta", f"{form.delta:.6e}"),
        ("total_norm", f"{form.total_norm:.6e}"), ("nnz", form.nnz), ("per_row", f"{form.per_row:.4f}"),
        ("near_per_row", f"{form.near.nnz / form.N:.1f}"),
        ("band_scale", form.band_scale),
    ]
    for key, value in lines:
        print(f"{key}: {value}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------


def _common(p, multi_k=False):
    p.add_argument("--shape", default="kite", help="kite | ellipse(a,b) | star(p,a) | file(path.json)")
    p.add_argument("--k", required=True, help="wavenumber" + (" list, comma separated" if multi_k else ""))
    p.add_argument("--kernel", default="single", choices=KINDS)
    p.add_argument("--eta", default="auto", help="coupling constant for the combined kernel (default k)")
    p.add_argument("--n", default="auto", help="samples per curve (default 8k rounded up to a power of 2)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", default=None, help="worker threads (env WAVEATOM_THREADS)")


def make_parser():
    parser = argparse.ArgumentParser(prog="waveatom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("compress", help="compress one kernel at one or more accuracies")
    _common(p)
    p.add_argument("--eps", required=True, help="comma-separated accuracies, e.g. 1e-1,1e-1.5,1e-2")
    p.add_argument("--out", help="NSF output path (suffixed per epsilon when several are given)")
    p.add_argument("--csv", help="CSV report path (default stdout)")
    p.add_argument("--no-timing", action="store_true", help="write 0 in the seconds column")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("table", help="one report row per (k, epsilon)")
    _common(p, multi_k=True)
    p.add_argument("--eps", default="1e-1,1e-1.5,1e-2")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("pattern", help="PGM image of the kept coefficients")
    p.add_argument("--nsf", help="read the form from an NSF file instead of compressing")
    p.add_argument("--shape", default="kite")
    p.add_argument("--k", default="128")
    p.add_argument("--kernel", default="single", choices=KINDS)
    p.add_argument("--eta", default="auto")
    p.add_argument("--n", default="auto")
    p.add_argument("--eps", default="1e-2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("solve", help="combined-field solve with bistatic RCS output")
    p.add_argument("--shape", default="kite")
    p.add_argument("--k", required=True)
    p.add_argument("--n", default="auto")
    p.add_argument("--eta", default="auto")
    p.add_argument("--angle", default="0", help="incident angles in radians, comma separated")
    p.add_argument("--mode", default="dense", choices=("dense", "compressed"))
    p.add_argument("--eps", default="1e-2")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--maxit", type=int, default=200)
    p.add_argument("--samples", type=int, default=360, help="observation angles for the RCS")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", default=None)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("apply-bench", help="dense matvec vs compressed apply timing")
    _common(p)
    p.add_argument("--eps", default="1e-2")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_apply_bench)

    p = sub.add_parser("info", help="print the header of an NSF file")
    p.add_argument("file")
    p.set_defaults(func=cmd_info)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
