"""Sparsity tables: per-row counts, thresholds and measured operator error.

One CSV row per (shape, kernel, k, epsilon). Defaults cover k = 32..256;
pass --k 32,64,128,256,512 for the full grid (k = 512 needs about 1 GB).

    python scripts/reproduce_tables.py --out results/tables.csv
"""

import argparse
import csv
import sys
import time

from waveatom import geometry
from waveatom.cli import parse_epsilon, parse_list
from waveatom.kernels import assemble, default_size
from waveatom.nsform import analyze, compress, estimate_l2_error

SHAPES = {"ellipse": geometry.make_ellipse, "kite": geometry.make_kite, "star": geometry.make_star}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--shapes", default="ellipse,kite,star")
    p.add_argument("--kernels", default="single,double")
    p.add_argument("--k", default="32,64,128,256")
    p.add_argument("--eps", default="1e-1,1e-1.5,1e-2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    args = p.parse_args(argv)

    eps_list = [parse_epsilon(e) for e in parse_list(args.eps, str)]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["shape", "kernel", "k", "N", "epsilon", "delta", "nnz", "per_row",
                     "eps_l2", "eps_l2_power", "seconds"])
    for shape in parse_list(args.shapes, str):
        curve = SHAPES[shape]()
        for kind in parse_list(args.kernels, str):
            for k in parse_list(args.k, int):
                t0 = time.perf_counter()
                N = default_size(k)
                kernel = assemble(curve, kind, k, N)
                coeffs = analyze(kernel)
                for eps in eps_list:
                    form = compress(coeffs, eps, kernel)
                    est = estimate_l2_error(form, kernel, seed=args.seed)
                    writer.writerow([shape, kind, k, N, f"{eps:.4g}", f"{form.delta:.3e}", form.nnz,
                                     f"{form.per_row:.1f}", f"{est.random_max:.3e}", f"{est.power:.3e}",
                                     f"{time.perf_counter() - t0:.1f}"])
                    fh.flush()
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
