"""Dense matvec vs compressed apply across k (kite, single layer by default).

    python scripts/apply_scaling.py --k 64,128,256,512
"""

import argparse
import time

import numpy as np

from waveatom.cli import parse_list, parse_shape
from waveatom.kernels import assemble
from waveatom.nsform import analyze, compress


def best_of(fn, repeats):
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return 1e3 * min(out)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--shape", default="kite")
    p.add_argument("--kernel", default="single")
    p.add_argument("--k", default="64,128,256")
    p.add_argument("--eps", type=float, default=1e-2)
    p.add_argument("--repeat", type=int, default=7)
    args = p.parse_args(argv)
    curve, label = parse_shape(args.shape)
    rng = np.random.default_rng(0)
    print("shape,kernel,k,N,nnz,per_row,t_dense_ms,t_sparse_ms,speedup")
    for k in parse_list(args.k, float):
        K = assemble(curve, args.kernel, k)
        form = compress(analyze(K), args.eps, K)
        f = rng.standard_normal(K.N) + 1j * rng.standard_normal(K.N)
        dense = K.values
        form.apply(f)
        td = best_of(lambda: dense @ f, args.repeat)
        ts = best_of(lambda: form.apply(f), args.repeat)
        print(f"{label},{args.kernel},{k:g},{K.N},{form.nnz},{form.per_row:.1f},{td:.2f},{ts:.2f},{td / ts:.2f}")


if __name__ == "__main__":
    main()
