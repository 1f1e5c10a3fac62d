"""Discrete orthonormal wave atoms in 1D and 2D, plus the extended (Gabor-augmented) frame.

Frequency layout for a signal of length N = 2^L (unitary DFT, bins k in [-N/2, N/2)):

* scale j has bands of half-width P_j = s 2^{j-1} bins and 2 P_j translates
  on [0, 1); the band scale s is a power of two (default 32, capped at N/16
  so that at least three scales remain);
* band (j, m) sharply owns bins [P_j m, P_j (m+1)) and the negative bins
  [-P_j (m+1), -P_j m);
* admissible bands are 2^j <= m < 2^{j+2} (plus the DC band m = 0 at j = 0);
  the last scale is cut at the Nyquist bin;
* extended bands add 0 <= m < 2^j at every scale j >= 1; these tile the
  low-pass region uniformly with the same width as the admissible bands.

Smooth windows come from folding: at each band boundary b the bin pair
(b + d, -b + d) is rotated by the angle (pi/2) nu((d + eps)/(2 eps)), which
leaves the two adjacent bands orthonormal because their negative-side signs
(-1)^m alternate. Every pair is congruent modulo the translation lattice of
both neighbours, so each windowed family keeps exact translation structure
and the whole collection is an orthonormal basis of C^N.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

# Overlap half-width at a boundary, as a fraction of the narrower neighbour's P.
OVERLAP = 0.5
# Band widths are s 2^{j-1} bins; s rescales the whole tiling (see README).
DEFAULT_BAND_SCALE = 32


def ramp_profile(x):
    """nu(x) = x^4 (35 - 84x + 70x^2 - 20x^3) on [0, 1], clipped outside; nu(x) + nu(1-x) = 1."""
    x = np.clip(x, 0.0, 1.0)
    return x**4 * (35.0 - 84.0 * x + 70.0 * x**2 - 20.0 * x**3)


def _ramp(d, eps):
    """(falling, rising) factors at offset d from a boundary with half-width eps."""
    d = np.asarray(d, dtype=float)
    if eps == 0:
        rise = (d >= 0).astype(float)
        return 1.0 - rise, rise
    theta = 0.5 * np.pi * ramp_profile((d + eps) / (2.0 * eps))
    return np.cos(theta), np.sin(theta)


def _check_size(N):
    if N < 16 or N & (N - 1):
        raise ValueError(f"signal length must be a power of 2 and at least 16, got {N}")


def _check_band_scale(s):
    if s < 1 or int(s) & (int(s) - 1) or s != int(s):
        raise ValueError(f"band scale must be a power of 2, got {s}")


def num_scales(N, band_scale=None):
    """Number of scales J + 1: scale j exists while its first bin s 2^{2j-1} < N/2."""
    _check_size(N)
    band_scale = band_scale or default_band_scale(N)
    _check_band_scale(band_scale)
    if band_scale * 2 > N // 2:
        raise ValueError(f"band scale {band_scale} too large for N={N}")
    j = 0
    while band_scale * 2.0 ** (2 * (j + 1) - 1) < N / 2:
        j += 1
    return j + 1


def band_width(j, band_scale):
    """Half-width P_j = s 2^{j-1} (in DFT bins) of every band at scale j."""
    return band_scale * 2.0 ** (j - 1)


def bands_at_scale(N, j, band_scale=None):
    """Number of extended bands M_j at scale j (Nyquist-truncated on the last scale)."""
    band_scale = band_scale or default_band_scale(N)
    return min(2 ** (j + 2), int(N // (band_scale * 2**j)))


def first_admissible(j):
    return 0 if j == 0 else 2**j


def is_admissible_1d(j, m):
    return (j == 0 and 0 <= m < 4) or (2**j <= m < 2 ** (j + 2))


def band_window(N, j, m, band_scale=None):
    """Sampled window of band (j, m): returns (bins in [-N/2, N/2), complex values)."""
    band_scale = band_scale or default_band_scale(N)
    P = band_width(j, band_scale)
    b_lo, b_hi = P * m, P * (m + 1)
    if m == 0:
        eps_lo = None
    elif j >= 1 and m == 2**j:
        eps_lo = OVERLAP * P / 2
    else:
        eps_lo = OVERLAP * P
    if b_hi == N / 2:
        eps_hi = 0.0
    elif j >= 1 and m == 2**j - 1:
        eps_hi = OVERLAP * P / 2
    else:
        eps_hi = OVERLAP * P
    sign = -1.0 if m % 2 else 1.0

    if eps_lo is None:
        kp = np.arange(0, int(np.floor(b_hi + eps_hi)) + 1)
        vp = _ramp(kp - b_hi, eps_hi)[0]
        kn = np.arange(int(np.ceil(-b_hi - eps_hi)), 0)
        vn = _ramp(kn + b_hi, eps_hi)[1]
    else:
        kp = np.arange(int(np.ceil(b_lo - eps_lo)), int(np.floor(b_hi + eps_hi)) + 1)
        vp = _ramp(kp - b_lo, eps_lo)[1] * _ramp(kp - b_hi, eps_hi)[0]
        kn = np.arange(int(np.ceil(-b_hi - eps_hi)), int(np.floor(-b_lo + eps_lo)) + 1)
        vn = _ramp(kn + b_lo, eps_lo)[0] * _ramp(kn + b_hi, eps_hi)[1]
    kp_keep = (vp != 0) & (kp >= 0) & (kp < N // 2)
    kn_keep = (vn != 0) & (kn < 0) & (kn >= -N // 2)
    bins = np.concatenate([kp[kp_keep], kn[kn_keep]])
    values = np.concatenate([vp[kp_keep], sign * vn[kn_keep]]).astype(complex)
    return bins, values


@dataclass(frozen=True)
class Band:
    j: int
    m: int
    admissible: bool
    bins: np.ndarray
    values: np.ndarray
    band_scale: int = DEFAULT_BAND_SCALE

    @property
    def translates(self):
        return self.band_scale * 2**self.j

    @property
    def center_bin(self):
        return band_width(self.j, self.band_scale) * (self.m + 0.5)


@dataclass(eq=False)
class Scale:
    j: int
    T: int  # translates per band
    bands: list  # extended order, m = 0 .. M_j - 1
    wrap: sp.csr_matrix = field(repr=False)  # (M_j * T, N): conj window, folded mod T
    unwrap: sp.csr_matrix = field(repr=False)  # wrap^H

    @property
    def M(self):
        return len(self.bands)

    @property
    def m0(self):
        return first_admissible(self.j)


class Tiling:
    """Immutable frequency layout for length-N signals."""

    def __init__(self, N, band_scale=None):
        _check_size(N)
        if band_scale is None:
            band_scale = default_band_scale(N)
        self.N = N
        self.band_scale = int(band_scale)
        self.scales = []
        for j in range(num_scales(N, band_scale)):
            M = bands_at_scale(N, j, band_scale)
            T = self.band_scale * 2**j
            bands, rows, cols, vals = [], [], [], []
            for m in range(M):
                bins, values = band_window(N, j, m, band_scale)
                bands.append(Band(j, m, is_admissible_1d(j, m), bins, values, self.band_scale))
                rows.append(m * T + np.mod(bins, T))
                cols.append(np.mod(bins, N))
                vals.append(np.conj(values))
            wrap = sp.csr_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(M * T, N),
            )
            self.scales.append(Scale(j, T, bands, wrap, wrap.conj().T.tocsr()))

        self._adm_offsets, self._ext_offsets = [], []
        a = e = 0
        for s in self.scales:
            self._adm_offsets.append(a)
            self._ext_offsets.append(e)
            a += (s.M - s.m0) * s.T
            e += s.M * s.T
        self.size_admissible = a
        self.size_extended = e

    def __repr__(self):
        return f"Tiling(N={self.N}, band_scale={self.band_scale}, scales={len(self.scales)})"

    # -- bookkeeping ---------------------------------------------------------
    def band(self, j, m):
        return self.scales[j].bands[m]

    def translates(self, j):
        return self.scales[j].T

    def admissible_bands(self):
        for s in self.scales:
            yield from s.bands[s.m0:]

    def extended_bands(self):
        for s in self.scales:
            yield from s.bands

    def window_energy(self):
        """sum over admissible bands of |window(k)|^2 for every DFT bin (index k mod N)."""
        total = np.zeros(self.N)
        for b in self.admissible_bands():
            np.add.at(total, np.mod(b.bins, self.N), np.abs(b.values) ** 2)
        return total

    def check_index(self, j, m, n, extended=True):
        if not 0 <= j < len(self.scales):
            raise IndexError(f"scale {j} out of range for N={self.N}")
        s = self.scales[j]
        lo = 0 if extended else s.m0
        if not lo <= m < s.M:
            raise IndexError(f"band {m} not valid at scale {j}")
        if not 0 <= n < s.T:
            raise IndexError(f"translate {n} not valid at scale {j}")

    def flat_index(self, j, m, n, extended=True):
        """Position of (j, m, n) in the flattened coefficient vector (array-friendly)."""
        # widen first: stored indices are uint8/uint16 and the products overflow
        j, m, n = (np.asarray(v, dtype=np.int64) for v in (j, m, n))
        T = self.band_scale * 2**j
        if extended:
            return np.asarray(self._ext_offsets)[j] + m * T + n
        m0 = np.where(j == 0, 0, 2**j)
        return np.asarray(self._adm_offsets)[j] + (m - m0) * T + n

    def ext_offsets(self):
        return list(self._ext_offsets)


_TILINGS = {}


def default_band_scale(N):
    return max(1, min(DEFAULT_BAND_SCALE, N // 16))


def build_tiling(N, band_scale=None):
    """Cached :class:`Tiling` for length N (band scale defaults to min(32, N/16))."""
    if band_scale is None:
        band_scale = default_band_scale(N)
    key = (N, int(band_scale))
    if key not in _TILINGS:
        _TILINGS[key] = Tiling(N, band_scale)
    return _TILINGS[key]


# ---------------------------------------------------------------------------
# coefficient containers
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class CoefficientTable1D:
    """Per-scale blocks of shape (bands, T_j [, batch...]); row r is band m0 + r."""

    tiling: Tiling
    blocks: list
    extended: bool = False

    def first_band(self, j):
        return 0 if self.extended else self.tiling.scales[j].m0

    def __getitem__(self, index):
        j, m, n = index
        self.tiling.check_index(j, m, n, self.extended)
        return self.blocks[j][m - self.first_band(j), n]

    def flat(self):
        return np.concatenate([b.reshape((-1,) + b.shape[2:]) for b in self.blocks])

    @classmethod
    def from_flat(cls, tiling, vec, extended=False):
        blocks, pos = [], 0
        for s in tiling.scales:
            nb = s.M if extended else s.M - s.m0
            size = nb * s.T
            blocks.append(vec[pos:pos + size].reshape((nb, s.T) + vec.shape[1:]))
            pos += size
        if pos != len(vec):
            raise ValueError(f"vector of length {len(vec)} does not match the layout ({pos})")
        return cls(tiling, blocks, extended)

    def norm(self):
        return float(np.sqrt(sum(np.vdot(b, b).real for b in self.blocks)))


@dataclass(eq=False)
class CoefficientTable2D:
    """Per-scale arrays C[j] of shape (M_j, M_j, T_j, T_j) indexed (m1, m2, n1, n2).

    For j >= 1 the Gabor x Gabor corner (m1, m2 < 2^j) is not part of the frame and is kept at zero.
    """

    tiling: Tiling
    blocks: list

    def __getitem__(self, index):
        j, m1, m2, n1, n2 = index
        if not is_admissible_2d(self.tiling, j, m1, m2):
            raise IndexError(f"(j={j}, m=({m1},{m2})) is not an admissible 2D index")
        return self.blocks[j][m1, m2, n1, n2]

    def admissible_mask(self, j):
        s = self.tiling.scales[j]
        mask = np.ones((s.M, s.M), dtype=bool)
        if j >= 1:
            mask[: 2**j, : 2**j] = False
        return mask

    def magnitudes(self):
        """Flat array of |C_mu| over all admissible mu, scale-major then (m1, m2, n1, n2)."""
        out = []
        for j, blk in enumerate(self.blocks):
            out.append(np.abs(blk[self.admissible_mask(j)]).ravel())
        return np.concatenate(out)

    def count(self):
        return sum(int(self.admissible_mask(j).sum()) * self.tiling.translates(j) ** 2
                   for j in range(len(self.blocks)))

    def norm(self):
        return float(np.sqrt(sum(np.vdot(b, b).real for b in self.blocks)))


def is_admissible_2d(tiling, j, m1, m2):
    if not 0 <= j < len(tiling.scales):
        return False
    M = tiling.scales[j].M
    if not (0 <= m1 < M and 0 <= m2 < M):
        return False
    return j == 0 or max(m1, m2) >= 2**j


# ---------------------------------------------------------------------------
# 1D transforms
# ---------------------------------------------------------------------------


def _as_tiling(N_or_tiling):
    return N_or_tiling if isinstance(N_or_tiling, Tiling) else build_tiling(N_or_tiling)


def _forward1d(f, tiling, extended):
    f = np.asarray(f)
    if f.shape[0] != tiling.N:
        raise ValueError(f"expected leading dimension {tiling.N}, got {f.shape}")
    F = np.fft.fft(f, axis=0, norm="ortho")
    flat_F = F.reshape(tiling.N, -1)
    blocks = []
    for s in tiling.scales:
        W = s.wrap if extended or s.m0 == 0 else s.wrap[s.m0 * s.T:]
        X = (W @ flat_F).reshape((-1, s.T) + f.shape[1:])
        blocks.append(np.fft.ifft(X, axis=1, norm="ortho"))
    return CoefficientTable1D(tiling, blocks, extended)


def _adjoint1d(table, extended):
    tiling = table.tiling
    if table.extended != extended:
        raise ValueError("coefficient table layout does not match the requested transform")
    trailing = table.blocks[0].shape[2:]
    F = np.zeros((tiling.N, int(np.prod(trailing, dtype=int))), dtype=complex)
    for s, blk in zip(tiling.scales, table.blocks):
        nb = s.M if extended else s.M - s.m0
        if blk.shape[:2] != (nb, s.T):
            raise ValueError(f"block at scale {s.j} has shape {blk.shape[:2]}, expected {(nb, s.T)}")
        Y = np.fft.fft(blk, axis=1, norm="ortho").reshape(nb * s.T, -1)
        U = s.unwrap if extended or s.m0 == 0 else s.unwrap[:, s.m0 * s.T:]
        F += U @ Y
    out = np.fft.ifft(F, axis=0, norm="ortho")
    return out.reshape((tiling.N,) + trailing)


def forward1d(f, tiling=None):
    """Coefficients <f, phi_lambda> over the admissible (orthonormal) index set."""
    f = np.asarray(f)
    return _forward1d(f, _as_tiling(tiling or f.shape[0]), extended=False)


def adjoint1d(table):
    """sum_lambda c_lambda phi_lambda; exact inverse of :func:`forward1d`."""
    return _adjoint1d(table, extended=False)


def forward1d_extended(f, tiling=None):
    """Coefficients <f, phi_lambda> for every lambda in the extended index set."""
    f = np.asarray(f)
    return _forward1d(f, _as_tiling(tiling or f.shape[0]), extended=True)


def adjoint1d_extended(table):
    """sum over the extended index set of c_lambda phi_lambda (not an inverse)."""
    return _adjoint1d(table, extended=True)


# ---------------------------------------------------------------------------
# 2D transforms
# ---------------------------------------------------------------------------


def forward2d(F, tiling=None, chunk=None):
    """2D coefficients <F, phi_mu>; phi_mu[i1, i2] = phi_{j,m1,n1}[i1] phi_{j,m2,n2}[i2]."""
    F = np.asarray(F)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError(f"expected a square array, got shape {F.shape}")
    tiling = _as_tiling(tiling or F.shape[0])
    if F.shape[0] != tiling.N:
        raise ValueError("array size does not match the tiling")
    Fh = np.fft.fft2(F, norm="ortho")
    blocks = []
    for s in tiling.scales:
        M, T = s.M, s.T
        # rows: wrap along axis 0, back to translations n1
        A = (s.wrap @ Fh).reshape(M, T, tiling.N)
        A = np.fft.ifft(A, axis=1, norm="ortho").reshape(M * T, tiling.N)
        out = np.empty((M, M, T, T), dtype=complex)
        step = chunk or max(1, (1 << 22) // max(1, M * T * T))
        for start in range(0, M, step):
            stop = min(M, start + step)
            # (m2, r2) x (m1, n1) for m1 in the chunk
            B = s.wrap @ A[start * T: stop * T].T
            B = np.fft.ifft(B.reshape(M, T, stop - start, T), axis=1, norm="ortho")
            out[start:stop] = B.transpose(2, 0, 3, 1)
        if s.j >= 1:
            out[: 2**s.j, : 2**s.j] = 0
        blocks.append(out)
        del A
    return CoefficientTable2D(tiling, blocks)


def adjoint2d(table):
    """sum_mu C_mu phi_mu over the admissible 2D index set; inverse of :func:`forward2d`."""
    tiling = table.tiling
    N = tiling.N
    Fh = np.zeros((N, N), dtype=complex)
    for s, blk in zip(tiling.scales, table.blocks):
        M, T = s.M, s.T
        if blk.shape != (M, M, T, T):
            raise ValueError(f"block at scale {s.j} has shape {blk.shape}")
        C = blk
        if s.j >= 1 and np.any(blk[: 2**s.j, : 2**s.j]):
            C = blk.copy()
            C[: 2**s.j, : 2**s.j] = 0
        X = np.fft.fft2(C, axes=(2, 3), norm="ortho").transpose(0, 2, 1, 3).reshape(M * T, M * T)
        Y = s.unwrap @ X  # (N, (m2, r2))
        Fh += (s.unwrap @ Y.T).T
    return np.fft.ifft2(Fh, norm="ortho")


# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------


def atom_spectrum(tiling, j, m, n):
    """Unitary DFT of the atom phi_{(j, m, n)} as a length-N array."""
    tiling.check_index(j, m, n, extended=True)
    b = tiling.band(j, m)
    T = tiling.translates(j)
    spec = np.zeros(tiling.N, dtype=complex)
    spec[np.mod(b.bins, tiling.N)] = b.values * np.exp(-2j * np.pi * b.bins * n / T) / np.sqrt(T)
    return spec


def synthesize_atom1d(index, N):
    """Samples of phi_lambda for lambda = (j, m, n) on the grid i/N (unit l2 norm).

    ``N`` may be a length or a :class:`Tiling`.
    """
    j, m, n = index
    tiling = _as_tiling(N)
    return np.fft.ifft(atom_spectrum(tiling, j, m, n), norm="ortho")


def synthesize_atom2d(index, N):
    """phi_mu = outer(phi_{(j, m1, n1)}, phi_{(j, m2, n2)}) for mu = (j, m1, m2, n1, n2)."""
    j, m1, m2, n1, n2 = index
    tiling = _as_tiling(N)
    if not is_admissible_2d(tiling, j, m1, m2):
        raise IndexError(f"(j={j}, m=({m1},{m2})) is not an admissible 2D index")
    return np.outer(synthesize_atom1d((j, m1, n1), tiling), synthesize_atom1d((j, m2, n2), tiling))
