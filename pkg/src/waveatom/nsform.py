"""Nonstandard wave atom form of a sampled kernel: analysis, thresholding, fast apply.

A kernel matrix A is expanded as A = sum_mu A_mu phi_{lambda1} (x) phi_{lambda2}
with same-scale 2D atoms. Applying the truncated expansion to f takes three steps:

1. f_lambda = sum_i phi_lambda[i] f[i] for every extended 1D index lambda,
2. g_lambda = sum over kept mu with first factor lambda of A_mu f_{second factor},
3. output = sum_lambda g_lambda phi_lambda.

Steps 1 and 3 are extended 1D transforms; step 2 is one sparse matvec.
The near-field quadrature band of the kernel is applied exactly on the side.
"""

import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .kernels import KINDS, DenseKernel
from .transform import (
    CoefficientTable1D,
    adjoint1d_extended,
    build_tiling,
    default_band_scale,
    forward1d_extended,
    forward2d,
)

NSF_MAGIC = b"WANS"
NSF_VERSION = 1
_HEADER = "<IdIBddddQ"
_RECORD = np.dtype([("j", "<u1"), ("m1", "<u2"), ("m2", "<u2"), ("n1", "<u2"), ("n2", "<u2"),
                    ("re", "<f8"), ("im", "<f8")])
# optional trailer holding the exact near-field band
_NEAR_MAGIC = b"WANF"
_NEAR_RECORD = np.dtype([("row", "<u4"), ("col", "<u4"), ("re", "<f8"), ("im", "<f8")])


def analyze(kernel):
    """Full admissible 2D coefficient table of the kernel's far part."""
    values = kernel.far if isinstance(kernel, DenseKernel) else np.asarray(kernel)
    return forward2d(values, build_tiling(values.shape[0]))


def threshold_for(magnitudes, budget):
    """Largest delta with sum_{|c| < delta} |c|^2 <= budget; returns (delta, keep_count).

    Coefficients equal to delta are kept. ``budget`` is an energy (squared norm).
    """
    a = np.sort(np.asarray(magnitudes, dtype=float).ravel())
    if a.size == 0:
        return 0.0, 0
    prefix = np.concatenate([[0.0], np.cumsum(a * a)])
    # p = number of smallest entries that may be dropped
    p = int(np.searchsorted(prefix, budget, side="right")) - 1
    if p >= a.size:
        return float("inf"), 0
    delta = float(a[p])
    kept = a.size - int(np.searchsorted(a, delta, side="left"))
    return delta, kept


@dataclass(eq=False)
class SparseNSForm:
    k: float
    N: int
    kind: str
    eta: float
    epsilon: float
    delta: float
    total_norm: float
    j: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    values: np.ndarray
    near: sp.csr_matrix = None
    band_scale: int = None
    _matrix: sp.csr_matrix = field(default=None, repr=False)

    def __post_init__(self):
        if self.band_scale is None:
            self.band_scale = default_band_scale(self.N)
        if self.near is None:
            self.near = sp.csr_matrix((self.N, self.N), dtype=complex)

    @property
    def nnz(self):
        return int(self.values.size)

    @property
    def per_row(self):
        return self.nnz / self.N

    @property
    def tiling(self):
        return build_tiling(self.N, self.band_scale)

    def entries(self):
        """Iterate ((j, m1, m2, n1, n2), value) in storage order."""
        for idx in zip(self.j, self.m1, self.m2, self.n1, self.n2, self.values):
            yield tuple(int(v) for v in idx[:5]), complex(idx[5])

    def matrix(self):
        """Sparse coupling matrix between extended 1D coefficient vectors."""
        if self._matrix is None:
            t = self.tiling
            rows = t.flat_index(self.j, self.m1, self.n1, extended=True)
            cols = t.flat_index(self.j, self.m2, self.n2, extended=True)
            n = t.size_extended
            self._matrix = sp.csr_matrix((self.values, (rows, cols)), shape=(n, n))
        return self._matrix

    def apply(self, f):
        """Approximate ``kernel.values @ f``; f has shape (N,) or (N, batch)."""
        f = np.asarray(f)
        if f.shape[0] != self.N:
            raise ValueError(f"expected leading dimension {self.N}, got {f.shape}")
        t = self.tiling
        coeffs = np.conj(forward1d_extended(np.conj(f), t).flat())
        g = self.matrix() @ coeffs
        out = adjoint1d_extended(CoefficientTable1D.from_flat(t, g, extended=True))
        return out + self.near @ f

    def apply_adjoint(self, g):
        """Conjugate transpose of :meth:`apply`."""
        g = np.asarray(g)
        t = self.tiling
        c = forward1d_extended(g, t).flat()
        h = self.matrix().conj().T @ c
        out = np.conj(adjoint1d_extended(CoefficientTable1D.from_flat(t, np.conj(h), extended=True)))
        return out + self.near.conj().T @ g

    def __matmul__(self, f):
        return self.apply(f)


def compress(coeffs, epsilon, kernel=None, absolute=False):
    """Keep the fewest coefficients so that the discarded l2 energy is within budget.

    Relative mode (default): sum_discarded |c|^2 <= epsilon^2 sum_all |c|^2.
    Absolute mode: sum_discarded |c|^2 <= epsilon^2.
    ``kernel`` supplies metadata and the near-field band.
    """
    if not 0 < epsilon < (np.inf if absolute else 1):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    tiling = coeffs.tiling
    mags = coeffs.magnitudes()
    total = float(np.sqrt(np.sum(mags * mags)))
    budget = epsilon**2 * (1.0 if absolute else total**2)
    meta = dict(k=0.0, kind="single", eta=0.0, near=None)
    if kernel is not None:
        if kernel.N != tiling.N:
            raise ValueError("kernel and coefficient table sizes differ")
        meta = dict(k=kernel.k, kind=kernel.kind, eta=kernel.eta, near=kernel.near)

    if total == 0.0:
        delta, parts = 0.0, []
    else:
        delta, _ = threshold_for(mags, budget)
        parts = []
        for j, blk in enumerate(coeffs.blocks):
            keep = (np.abs(blk) >= delta) & coeffs.admissible_mask(j)[:, :, None, None]
            idx = np.nonzero(keep)
            parts.append((j, idx, blk[idx]))
    cols = {name: [] for name in ("j", "m1", "m2", "n1", "n2", "values")}
    for j, idx, vals in parts:
        cols["j"].append(np.full(vals.size, j, dtype=np.uint8))
        for name, arr in zip(("m1", "m2", "n1", "n2"), idx):
            cols[name].append(arr.astype(np.uint16))
        cols["values"].append(vals)
    arrays = {name: (np.concatenate(v) if v else np.zeros(0, dtype=np.uint16))
              for name, v in cols.items()}
    arrays["j"] = arrays["j"].astype(np.uint8)
    arrays["values"] = arrays["values"].astype(complex)
    return SparseNSForm(k=meta["k"], N=tiling.N, kind=meta["kind"], eta=meta["eta"],
                        epsilon=float(epsilon), delta=float(delta), total_norm=total,
                        near=meta["near"], band_scale=tiling.band_scale, **arrays)


# ---------------------------------------------------------------------------
# error estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorEstimate:
    random_max: float  # max over trials of |(A - A~) f| / |A_far f|
    random_mean: float
    power: float  # power-method estimate of |A - A~|_2 / |A_far|_2
    trials: int


def _random_vectors(rng, N, count):
    return (rng.standard_normal((N, count)) + 1j * rng.standard_normal((N, count))) / np.sqrt(2)


def estimate_l2_error(form, kernel, trials=20, power_iterations=10, seed=0):
    """Relative operator error of the compressed form against the dense far part.

    The near band is exact in both, so the difference is measured against
    the part that was expanded.
    """
    if trials < 5:
        raise ValueError("need at least 5 random trials")
    rng = np.random.default_rng(seed)
    far = kernel.far
    near = kernel.near

    F = _random_vectors(rng, form.N, trials)
    exact = far @ F
    diff = exact + near @ F - form.apply(F)
    ratios = np.linalg.norm(diff, axis=0) / np.linalg.norm(exact, axis=0)

    power = float("nan")
    if power_iterations > 0:
        def op(x):
            return far @ x + near @ x - form.apply(x)

        def op_h(y):
            return far.conj().T @ y + near.conj().T @ y - form.apply_adjoint(y)

        x = _random_vectors(rng, form.N, 1)[:, 0]
        y = x.copy()
        for _ in range(power_iterations):
            x = op_h(op(x / np.linalg.norm(x)))
            y = far.conj().T @ (far @ (y / np.linalg.norm(y)))
        norm_diff = np.sqrt(np.linalg.norm(x))
        norm_far = np.sqrt(np.linalg.norm(y))
        power = float(norm_diff / norm_far) if norm_far > 0 else 0.0
    return ErrorEstimate(float(ratios.max()), float(ratios.mean()), power, trials)


@dataclass(frozen=True)
class SparsityReport:
    k: float
    N: int
    epsilon: float
    delta: float
    nnz: int
    per_row: float
    eps_l2: float
    eps_l2_power: float
    near_per_row: float

    @classmethod
    def from_form(cls, form, estimate=None):
        return cls(k=form.k, N=form.N, epsilon=form.epsilon, delta=form.delta, nnz=form.nnz,
                   per_row=form.per_row,
                   eps_l2=estimate.random_max if estimate else float("nan"),
                   eps_l2_power=estimate.power if estimate else float("nan"),
                   near_per_row=form.near.nnz / form.N)


# ---------------------------------------------------------------------------
# sparsity pattern
# ---------------------------------------------------------------------------


def block_origin(tiling, j, m):
    """Pixel offset of band (j, m) along one axis of the frequency-ordered layout."""
    return tiling.translates(j) * m


def sparsity_pattern(form, block_layout="frequency"):
    """N x N uint8 image, 0 for a kept coefficient and 255 elsewhere.

    Block (j, m1, m2) sits at rows T_j m1 + n1 and columns T_j m2 + n2, so
    blocks appear in the position of their frequency band: lowest
    frequencies at the top left, highest at the bottom right.
    """
    if block_layout != "frequency":
        raise ValueError(f"unknown block layout {block_layout!r}")
    t = form.tiling
    img = np.full((form.N, form.N), 255, dtype=np.uint8)
    if form.nnz:
        T = np.array([t.translates(j) for j in range(len(t.scales))])[form.j]
        rows = T * form.m1.astype(np.int64) + form.n1
        cols = T * form.m2.astype(np.int64) + form.n2
        img[rows, cols] = 0
    return img


def write_pgm(image, path):
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(image, dtype=np.uint8).tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4], dtype=np.uint8, count=w * h).reshape(h, w)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def save_nsf(form, path):
    if form.band_scale != default_band_scale(form.N):
        raise ValueError("only the default tiling can be stored in an NSF file")
    header = NSF_MAGIC + struct.pack(
        _HEADER, NSF_VERSION, form.k, form.N, KINDS.index(form.kind), form.eta,
        form.epsilon, form.delta, form.total_norm, form.nnz,
    )
    rec = np.empty(form.nnz, dtype=_RECORD)
    rec["j"], rec["m1"], rec["m2"], rec["n1"], rec["n2"] = form.j, form.m1, form.m2, form.n1, form.n2
    rec["re"], rec["im"] = form.values.real, form.values.imag
    near = form.near.tocoo()
    nrec = np.empty(near.nnz, dtype=_NEAR_RECORD)
    nrec["row"], nrec["col"] = near.row, near.col
    nrec["re"], nrec["im"] = near.data.real, near.data.imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(rec.tobytes())
        if near.nnz:
            fh.write(_NEAR_MAGIC + struct.pack("<Q", near.nnz))
            fh.write(nrec.tobytes())


def load_nsf(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != NSF_MAGIC:
        raise ValueError(f"{path}: not an NSF file")
    version, k, N, kind, eta, eps, delta, total, nnz = struct.unpack_from(_HEADER, data, 4)
    if version != NSF_VERSION:
        raise ValueError(f"{path}: unsupported NSF version {version}")
    pos = 4 + struct.calcsize(_HEADER)
    rec = np.frombuffer(data, dtype=_RECORD, count=nnz, offset=pos)
    pos += nnz * _RECORD.itemsize
    near = None
    if data[pos:pos + 4] == _NEAR_MAGIC:
        (count,) = struct.unpack_from("<Q", data, pos + 4)
        nrec = np.frombuffer(data, dtype=_NEAR_RECORD, count=count, offset=pos + 12)
        near = sp.csr_matrix((nrec["re"] + 1j * nrec["im"], (nrec["row"], nrec["col"])), shape=(N, N))
    values = np.empty(nnz, dtype=complex)
    values.real, values.imag = rec["re"], rec["im"]
    return SparseNSForm(k=k, N=N, kind=KINDS[kind], eta=eta, epsilon=eps, delta=delta, total_norm=total,
                        j=rec["j"].copy(), m1=rec["m1"].copy(), m2=rec["m2"].copy(),
                        n1=rec["n1"].copy(), n2=rec["n2"].copy(), values=values, near=near)
