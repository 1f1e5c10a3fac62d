import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from waveatom.special import hankel1
from waveatom.geometry import make_ellipse
from waveatom.transform import (
    CoefficientTable1D,
    adjoint1d,
    adjoint1d_extended,
    adjoint2d,
    atom_spectrum,
    band_window,
    build_tiling,
    forward1d,
    forward1d_extended,
    forward2d,
    is_admissible_2d,
    synthesize_atom1d,
    synthesize_atom2d,
)

from conftest import crandn

SIZES_1D = [16, 64, 256, 1024]


def random_index(tiling, rng, extended=False, two_d=False):
    j = int(rng.integers(len(tiling.scales)))
    s = tiling.scales[j]
    lo = 0 if extended else s.m0
    if two_d:
        while True:
            m1, m2 = (int(v) for v in rng.integers(0, s.M, 2))
            if is_admissible_2d(tiling, j, m1, m2):
                return j, m1, m2, int(rng.integers(s.T)), int(rng.integers(s.T))
    return j, int(rng.integers(lo, s.M)), int(rng.integers(s.T))


# -- tiling -------------------------------------------------------------------


@pytest.mark.parametrize("N", SIZES_1D + [4096])
def test_admissible_count_equals_N(N):
    t = build_tiling(N)
    assert t.size_admissible == N
    assert sum(b.translates for b in t.admissible_bands()) == N


@pytest.mark.parametrize("N", SIZES_1D)
def test_extended_adds_gabor_bands(N):
    t = build_tiling(N)
    extra = sum(2**s.j * s.T for s in t.scales if s.j >= 1)
    assert t.size_extended == N + extra


@pytest.mark.parametrize("N", SIZES_1D + [4096])
@pytest.mark.parametrize("band_scale", [None, 1, 2, 4])
def test_partition_of_unity(N, band_scale):
    if band_scale is not None and band_scale > N // 16:
        pytest.skip("band scale too coarse for N")
    t = build_tiling(N, band_scale)
    assert np.abs(t.window_energy() - 1).max() <= 1e-12


def test_band_bins_follow_the_tiling_rule():
    # at unit band scale, band (2, 4) owns bins [8, 10) and overlaps its neighbours
    bins, values = band_window(256, 2, 4, band_scale=1)
    pos = bins[bins >= 0]
    assert pos.min() == 8 and pos.max() < 12
    full = np.abs(values[(bins == 8) | (bins == 9)])
    assert np.all(full > 0.5)


def test_band_centres_scale_parabolically():
    t = build_tiling(1024, 1)
    for s in t.scales:
        widths = {len(b.bins[b.bins >= 0]) for b in s.bands[s.m0:-1]}
        assert max(widths) <= 2 * 2**s.j
        for b in s.bands:
            assert abs(b.center_bin - 2 ** (s.j - 1) * (b.m + 0.5)) < 1e-12 if s.j else True


@pytest.mark.parametrize("N", [15, 100, 8])
def test_bad_sizes_rejected(N):
    with pytest.raises(ValueError):
        build_tiling(N)


# -- 1D transforms -------------------------------------------------------------


@pytest.mark.parametrize("N", [256, 1024, 4096])
def test_parseval_and_reconstruction_1d(N, rng):
    f = crandn(rng, N, 100)
    c = forward1d(f)
    energy = np.sum(np.abs(c.flat()) ** 2, axis=0)
    assert np.abs(energy / np.sum(np.abs(f) ** 2, axis=0) - 1).max() <= 1e-10
    back = adjoint1d(c)
    assert np.linalg.norm(back - f) <= 1e-10 * np.linalg.norm(f)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([16, 32, 64, 128, 512]), st.integers(0, 2**32 - 1))
def test_reconstruction_property(N, seed):
    f = crandn(np.random.default_rng(seed), N)
    assert np.linalg.norm(adjoint1d(forward1d(f)) - f) <= 1e-12 * np.linalg.norm(f)


def test_zero_input():
    assert np.all(forward1d(np.zeros(256)).flat() == 0)
    assert np.all(forward1d_extended(np.zeros(256)).flat() == 0)


@pytest.mark.parametrize("N", [64, 256])
def test_atoms_are_orthonormal_basis(N, rng):
    t = build_tiling(N)
    for _ in range(10):
        j, m, n = random_index(t, rng)
        c = forward1d(synthesize_atom1d((j, m, n), t))
        assert abs(c[j, m, n] - 1) < 1e-10
        flat = c.flat()
        flat[t.flat_index(j, m, n, extended=False)] = 0
        assert np.abs(flat).max() < 1e-10


@pytest.mark.parametrize("N", [256, 1024])
def test_extended_matches_brute_force_inner_products(N, rng):
    t = build_tiling(N)
    f = crandn(rng, N)
    ext = forward1d_extended(f, t)
    adm = forward1d(f, t)
    for _ in range(20):
        j, m, n = random_index(t, rng, extended=True)
        oracle = np.vdot(synthesize_atom1d((j, m, n), t), f)
        assert abs(ext[j, m, n] - oracle) <= 1e-10 * np.linalg.norm(f)
        if m >= t.scales[j].m0:
            assert ext[j, m, n] == adm[j, m, n]


def test_extended_pair_is_adjoint_but_not_inverse(rng):
    t = build_tiling(256)
    f = crandn(rng, 256)
    c = crandn(rng, t.size_extended)
    lhs = np.vdot(forward1d_extended(f, t).flat(), c)
    rhs = np.vdot(f, adjoint1d_extended(CoefficientTable1D.from_flat(t, c, extended=True)))
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)
    back = adjoint1d_extended(forward1d_extended(f, t))
    assert np.linalg.norm(back - f) > 1e-3 * np.linalg.norm(f)


def test_table_layout_errors():
    t = build_tiling(64)
    c = forward1d(np.ones(64), t)
    with pytest.raises(ValueError):
        adjoint1d_extended(c)
    with pytest.raises(ValueError):
        forward1d(np.ones(65), t)
    with pytest.raises(ValueError):
        CoefficientTable1D.from_flat(t, np.zeros(63))
    with pytest.raises(IndexError):
        c[0, 0, t.translates(0)]


# -- atoms ---------------------------------------------------------------------


@pytest.mark.parametrize("N", [256, 1024])
def test_atom_norm_and_spectral_support(N, rng):
    t = build_tiling(N)
    for _ in range(20):
        j, m, n = random_index(t, rng, extended=True)
        a = synthesize_atom1d((j, m, n), t)
        assert abs(np.linalg.norm(a) - 1) < 1e-10
        spec = np.fft.fft(a, norm="ortho")
        outside = np.ones(N, dtype=bool)
        outside[np.mod(t.band(j, m).bins, N)] = False
        assert np.abs(spec[outside]).max(initial=0) <= 1e-12


def test_atom_spectrum_matches_fft():
    t = build_tiling(128)
    a = synthesize_atom1d((1, 3, 5), t)
    assert np.allclose(np.fft.fft(a, norm="ortho"), atom_spectrum(t, 1, 3, 5), atol=1e-14)


def test_interior_atoms_decay():
    N = 1024
    t = build_tiling(N)
    x = np.arange(N) / N
    for s in t.scales:
        # interior bands only: the first admissible band at j >= 1 and the
        # Nyquist-truncated top band have sharper windows
        bands = range(s.m0 + (s.j >= 1), s.M - (s.j == len(t.scales) - 1))
        for m in bands:
            n = s.T // 3
            a = np.abs(synthesize_atom1d((s.j, m, n), t))
            d = np.abs((x - n / s.T + 0.5) % 1 - 0.5)
            assert a[d >= 8 / s.T].max() <= 1e-3 * a.max()


def test_invalid_atom_index():
    t = build_tiling(64)
    with pytest.raises(IndexError):
        synthesize_atom1d((9, 0, 0), t)
    with pytest.raises(IndexError):
        synthesize_atom2d((1, 0, 0, 0, 0), t)


# -- 2D transforms -------------------------------------------------------------


@pytest.mark.parametrize("N", [64, 256])
def test_parseval_and_reconstruction_2d(N, rng):
    t = build_tiling(N)
    for _ in range(100 if N == 64 else 20):
        F = crandn(rng, N, N)
        c = forward2d(F, t)
        assert abs(c.norm() / np.linalg.norm(F) - 1) <= 1e-10
        assert np.linalg.norm(adjoint2d(c) - F) <= 1e-10 * np.linalg.norm(F)
    assert c.count() == N * N


def test_outer_product_of_atoms_gives_unit_coefficient(rng):
    t = build_tiling(128)
    for _ in range(5):
        mu = random_index(t, rng, two_d=True)
        c = forward2d(synthesize_atom2d(mu, t), t)
        assert abs(c[mu] - 1) < 1e-10
        assert abs(c.norm() - 1) < 1e-10


def test_single_layer_coefficients_match_inner_products(rng):
    N, k = 256, 32
    x = make_ellipse(1, 1).sample(N)["x"]
    r = np.hypot(*(x[:, None, :] - x[None, :, :]).transpose(2, 0, 1))
    np.fill_diagonal(r, 1.0)
    F = 0.25j * hankel1(0, k * r)
    np.fill_diagonal(F, 0.0)
    t = build_tiling(N)
    c = forward2d(F, t)
    for _ in range(10):
        mu = random_index(t, rng, two_d=True)
        assert abs(c[mu] - np.vdot(synthesize_atom2d(mu, t), F)) <= 1e-8


def test_chunked_forward2d_is_identical(rng):
    F = crandn(rng, 128, 128)
    a, b = forward2d(F), forward2d(F, chunk=1)
    assert all(np.array_equal(x, y) for x, y in zip(a.blocks, b.blocks))


def test_forward2d_shape_errors():
    with pytest.raises(ValueError):
        forward2d(np.zeros((64, 32)))
    with pytest.raises(ValueError):
        forward2d(np.zeros((64, 64)), build_tiling(128))


def _median_time(fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def test_forward1d_scaling(rng):
    # the number of scales steps up at every other doubling, so single
    # doublings alternate between cheap and costly; compare over two
    times = {}
    for N in (1 << 13, 1 << 15):
        f, t = crandn(rng, N), build_tiling(N)
        forward1d(f, t)
        times[N] = _median_time(lambda: forward1d(f, t), repeats=7)
    per_doubling = np.sqrt(times[1 << 15] / times[1 << 13])
    assert per_doubling <= 2.6


def test_flat_index_with_narrow_integer_arrays():
    # stored form indices are uint8/uint16; the layout arithmetic must not wrap
    t = build_tiling(4096)
    j = len(t.scales) - 1
    s = t.scales[j]
    m, n = s.M - 1, s.T - 1
    wide = t.flat_index(j, m, n, extended=True)
    narrow = t.flat_index(np.array([j], np.uint8), np.array([m], np.uint16), np.array([n], np.uint16))
    assert narrow[0] == wide == t.size_extended - 1
