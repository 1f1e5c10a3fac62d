"""Write PGM images of the kept coefficients for each shape and kernel.

    python scripts/sparsity_patterns.py --k 128 --eps 1e-2 --outdir results/patterns
"""

import argparse
from pathlib import Path

import numpy as np

from waveatom import geometry
from waveatom.cli import parse_epsilon
from waveatom.kernels import assemble
from waveatom.nsform import analyze, compress, sparsity_pattern, write_pgm


def block_summary(form):
    """nnz per (j, m1, m2) block, largest first."""
    keys, counts = np.unique(np.stack([form.j, form.m1, form.m2]), axis=1, return_counts=True)
    order = np.argsort(-counts)
    return [(tuple(int(v) for v in keys[:, i]), int(counts[i])) for i in order]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--k", type=float, default=128)
    p.add_argument("--eps", default="1e-2")
    p.add_argument("--outdir", default="results/patterns")
    args = p.parse_args(argv)
    eps = parse_epsilon(args.eps)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    shapes = {"ellipse": geometry.make_ellipse(), "kite": geometry.make_kite(), "star": geometry.make_star()}
    for name, curve in shapes.items():
        for kind in ("single", "double"):
            K = assemble(curve, kind, args.k)
            form = compress(analyze(K), eps, K)
            path = out / f"{name}_{kind}_k{args.k:g}.pgm"
            write_pgm(sparsity_pattern(form), path)
            top = ", ".join(f"{b}:{c}" for b, c in block_summary(form)[:4])
            print(f"{path}  per_row={form.per_row:.1f}  busiest blocks (j,m1,m2) {top}")


if __name__ == "__main__":
    main()
