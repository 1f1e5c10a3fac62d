"""Sampled Helmholtz boundary kernels on the parameter square [0,1)^2.

Row i is the target s_i = i/N, column j the source t_j = j/N; the source
speed |x'(t_j)| and the quadrature weight of column j (relative to row i)
are folded into each entry so that ``values @ density`` approximates the
boundary integral.
"""

import struct
import numpy as np
import scipy.sparse as sp

from .special import EULER_GAMMA, hankel1

# Kapur-Rokhlin corrections for a periodic integrand with a log singularity at
# the target node (6th order). The target node itself gets weight zero and
# the nodes at cyclic offset l = 1..6 get weight h (1 + KR6_GAMMA[l-1]).
KR6_GAMMA = np.array([
    4.967362978287758,
    -16.20501504859126,
    25.85153761832639,
    -22.22599466791883,
    9.930104998037539,
    -1.817995878141594,
])

KINDS = ("single", "double", "combined")
_KIND_CODE = {name: i for i, name in enumerate(KINDS)}

_DUMP_MAGIC = b"WADK"
_DUMP_VERSION = 1
_ROW_CHUNK = 256


class DenseKernel:
    """Sampled kernel split as ``values = far + near``.

    ``far`` is the plain sampled kernel with trapezoidal weights (and, for the
    single layer, a cell-averaged diagonal); ``near`` is the sparse banded
    remainder carrying the local quadrature corrections. The sum is the
    quadrature matrix itself. Only ``far`` is expanded in wave atoms; the
    near band is applied exactly.
    """

    def __init__(self, k, N, kind, far, near=None, eta=0.0, shape="custom"):
        if kind not in KINDS:
            raise ValueError(f"unknown kernel kind {kind!r}")
        if far.shape != (N, N):
            raise ValueError(f"values must be {N}x{N}, got {far.shape}")
        self.k = float(k)
        self.N = int(N)
        self.kind = kind
        self.eta = float(eta)
        self.shape = shape
        self.far = far
        self.near = sp.csr_matrix((N, N), dtype=complex) if near is None else sp.csr_matrix(near)
        self._values = None

    @property
    def values(self):
        if self._values is None:
            if self.near.nnz == 0:
                self._values = self.far
            else:
                v = self.far.copy()
                coo = self.near.tocoo()
                v[coo.row, coo.col] += coo.data
                self._values = v
        return self._values

    def near_per_row(self):
        return self.near.nnz / self.N

    def matvec(self, f):
        return self.far @ f + self.near @ f

    def __repr__(self):
        return f"DenseKernel(kind={self.kind}, k={self.k:g}, N={self.N}, eta={self.eta:g}, shape={self.shape})"


def default_size(k, points_per_wavelength=8):
    """N = 8k rounded up to a power of two (at least 16)."""
    if not k > 0:
        raise ValueError("wavenumber must be positive")
    target = max(16, int(np.ceil(points_per_wavelength * k - 1e-9)))
    return 1 << (target - 1).bit_length()


def log_weights(N):
    """Dense quadrature weight table W[i, j] for a log-singular periodic kernel (h = 1/N).

    Reference only; assembly applies the same rule through the near band.
    """
    if N < 2 * len(KR6_GAMMA) + 2:
        raise ValueError(f"N={N} too small for the corrected rule")
    h = 1.0 / N
    row = np.full(N, h)
    row[0] = 0.0
    for l, g in enumerate(KR6_GAMMA, start=1):
        row[l] += h * g
        row[-l] += h * g
    idx = (np.arange(N)[None, :] - np.arange(N)[:, None]) % N
    return row[idx]


def _check(k, N):
    if not k > 0:
        raise ValueError("wavenumber must be positive")
    if N < 16 or N & (N - 1):
        raise ValueError(f"N must be a power of 2 and at least 16, got {N}")


def _rows(N):
    for start in range(0, N, _ROW_CHUNK):
        yield slice(start, min(N, start + _ROW_CHUNK))


def _single_parts(curve, k, N):
    """Return (far, near) for k G0: plain samples plus the banded correction."""
    geo = curve.sample(N)
    x, speed = geo["x"], geo["speed"]
    h = 1.0 / N
    far = np.empty((N, N), dtype=complex)
    for rows in _rows(N):
        diff = x[rows, None, :] - x[None, :, :]
        r = np.hypot(diff[..., 0], diff[..., 1])
        i_loc = np.arange(rows.start, rows.stop)
        r[i_loc - rows.start, i_loc] = 1.0  # placeholder, overwritten below
        far[rows] = (0.25j * k * h) * hankel1(0, k * r) * speed[None, :]
    # diagonal: cell average of k G0 over |tau| < h/2 from the small-argument form of H0
    z = k * speed * h / 4.0
    diag = (0.25j * k * h) * speed * (1.0 + (2j / np.pi) * (np.log(z) - 1.0 + EULER_GAMMA))
    far[np.diag_indices(N)] = diag

    idx = np.arange(N)
    rows, cols, vals = [idx], [idx], [-diag]
    for l, g in enumerate(KR6_GAMMA, start=1):
        for shift in (l, -l):
            c = (idx + shift) % N
            rows.append(idx)
            cols.append(c)
            vals.append(g * far[idx, c])
    near = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    return far, near


def _double_values(curve, k, N):
    geo = curve.sample(N)
    x, speed, normal, kappa = geo["x"], geo["speed"], geo["normal"], geo["curvature"]
    h = 1.0 / N
    out = np.empty((N, N), dtype=complex)
    for rows in _rows(N):
        diff = x[rows, None, :] - x[None, :, :]
        r = np.hypot(diff[..., 0], diff[..., 1])
        proj = diff[..., 0] * normal[None, :, 0] + diff[..., 1] * normal[None, :, 1]
        i_loc = np.arange(rows.start, rows.stop)
        off = np.ones(r.shape, dtype=bool)
        off[i_loc - rows.start, i_loc] = False
        vals = np.empty(r.shape, dtype=complex)
        vals[off] = (0.25j * k) * hankel1(1, k * r[off]) * proj[off] / r[off]
        vals[~off] = -kappa[i_loc] / (4.0 * np.pi)
        out[rows] = vals * speed[None, :] * h
    return out


def assemble_single(curve, k, N=None):
    """k G0 with G0(s, t) = (i/4) H0(k |x(s) - x(t)|) |x'(t)| and log-corrected weights."""
    N = N or default_size(k)
    _check(k, N)
    far, near = _single_parts(curve, k, N)
    return DenseKernel(k, N, "single", far, near, shape=curve.name)


def assemble_double(curve, k, N=None):
    """dG/dn_y: (ik/4) H1(k phi) (x(s) - x(t)) . n(t) / phi |x'(t)|, trapezoidal weights.

    The diagonal carries the continuous limit -curvature/(4 pi).
    """
    N = N or default_size(k)
    _check(k, N)
    return DenseKernel(k, N, "double", _double_values(curve, k, N), shape=curve.name)


def assemble_combined(curve, k, N=None, eta=None, single=None, double=None):
    """Combined-field kernel G1 - i eta G0 (eta defaults to k).

    Precomputed ``single``/``double`` kernels may be passed to avoid reassembly.
    """
    N = N or default_size(k)
    eta = float(k) if eta is None else float(eta)
    if eta < 0:
        raise ValueError("coupling constant must be nonnegative")
    if single is None:
        single = assemble_single(curve, k, N)
    if double is None:
        double = assemble_double(curve, k, N)
    if single.N != N or double.N != N:
        raise ValueError("precomputed kernels do not match N")
    if eta == 0:
        return DenseKernel(k, N, "combined", double.far.copy(), double.near, eta=0.0, shape=curve.name)
    scale = -1j * eta / single.k
    far = double.far + scale * single.far
    near = double.near + scale * single.near
    return DenseKernel(k, N, "combined", far, near, eta=eta, shape=curve.name)


def assemble(curve, kind, k, N=None, eta=None):
    if kind == "single":
        return assemble_single(curve, k, N)
    if kind == "double":
        return assemble_double(curve, k, N)
    if kind == "combined":
        return assemble_combined(curve, k, N, eta)
    raise ValueError(f"unknown kernel kind {kind!r}")


def dump_kernel(kernel, path):
    """Binary debug dump: header then N^2 complex64 values, row-major, little-endian."""
    header = _DUMP_MAGIC + struct.pack(
        "<IdIBd", _DUMP_VERSION, kernel.k, kernel.N, _KIND_CODE[kernel.kind], kernel.eta
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(kernel.values.astype("<c8").tobytes())


def load_kernel_dump(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _DUMP_MAGIC:
        raise ValueError(f"{path}: not a kernel dump")
    version, k, N, kind, eta = struct.unpack_from("<IdIBd", data, 4)
    if version != _DUMP_VERSION:
        raise ValueError(f"{path}: unsupported dump version {version}")
    offset = 4 + struct.calcsize("<IdIBd")
    values = np.frombuffer(data, dtype="<c8", count=N * N, offset=offset).reshape(N, N)
    return DenseKernel(k, N, KINDS[kind], values.astype(complex), eta=eta)
