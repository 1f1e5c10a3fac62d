"""Bistatic RCS for several incident angles against one shared compressed form.

Solves run in a thread pool; the form is read-only, so concurrent applies are safe.

    python scripts/rcs_sweep.py --shape star --k 32 --n 1024 --angles 0,0.5,1.0,1.5
"""

import argparse
import csv
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from waveatom.cli import parse_list, parse_shape
from waveatom.kernels import assemble_combined
from waveatom.nsform import analyze, compress
from waveatom.solver import IncidentWave, bistatic_rcs, far_field, solve_bie


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--shape", default="star")
    p.add_argument("--k", type=float, default=32)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--eps", type=float, default=1e-2)
    p.add_argument("--angles", default="0,0.5,1.0,1.5")
    p.add_argument("--samples", type=int, default=180)
    p.add_argument("--threads", type=int, default=2)
    p.add_argument("--out")
    args = p.parse_args(argv)

    curve, label = parse_shape(args.shape)
    K = assemble_combined(curve, args.k, args.n)
    form = compress(analyze(K), args.eps, K)
    obs = np.linspace(0, 2 * np.pi, args.samples, endpoint=False)

    def run(angle):
        res = solve_bie(curve, args.k, IncidentWave.from_angle(angle, args.k), mode="compressed",
                        N=args.n, form=form, tol=1e-6, raise_on_failure=False)
        return angle, res, bistatic_rcs(far_field(curve, res.density, args.k, res.eta, obs))

    with ThreadPoolExecutor(args.threads) as pool:
        results = list(pool.map(run, parse_list(args.angles, float)))

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["shape", "k", "N", "incident", "iterations", "converged", "theta", "rcs_db"])
    for angle, res, rcs in results:
        for th, db in zip(obs, rcs.db):
            w.writerow([label, f"{args.k:g}", args.n, angle, res.iterations, res.converged,
                        f"{th:.4f}", f"{db:.3f}"])
    if args.out:
        fh.close()
    for angle, res, _ in results:
        print(f"incident {angle}: {res.iterations} iterations, converged={res.converged}", file=sys.stderr)


if __name__ == "__main__":
    main()
