import numpy as np
import pytest
from scipy.special import hankel1 as sp_hankel1, jv, jvp

from waveatom.geometry import make_ellipse, make_kite, make_star
from waveatom.kernels import (
    KR6_GAMMA,
    DenseKernel,
    assemble,
    assemble_combined,
    assemble_double,
    assemble_single,
    default_size,
    dump_kernel,
    load_kernel_dump,
    log_weights,
)

from conftest import crandn


def circle_single_eigenvalue(n, k):
    # k * int (i/4) H0(k|x - y|) e^{i n theta'} ds' on the unit circle
    return k * 1j * np.pi / 2 * jv(n, k) * sp_hankel1(n, k)


def circle_double_eigenvalue(n, k):
    return 1j * np.pi * k / 2 * jvp(n, k) * sp_hankel1(n, k) - 0.5


def test_default_size():
    assert default_size(32) == 256
    assert default_size(100) == 1024
    assert default_size(1) == 16
    with pytest.raises(ValueError):
        default_size(0)


def _log_mode_error(N, n, node=3):
    # int_0^1 log|2 sin pi (t - s)| cos(2 pi n t) dt = -cos(2 pi n s) / (2 n)
    t = np.arange(N) / N
    s = t[node]
    d = np.abs(2 * np.sin(np.pi * (t - s)))
    d[node] = 1.0
    got = log_weights(N)[node] @ (np.log(d) * np.cos(2 * np.pi * n * t))
    return abs(got + np.cos(2 * np.pi * n * s) / (2 * n))


def test_corrected_rule_integrates_log_modes():
    for n in (1, 2, 5, 9):
        assert _log_mode_error(2048, n) < 1e-11


@pytest.mark.parametrize("n", [5, 9])
def test_corrected_rule_is_sixth_order(n):
    errs = [_log_mode_error(N, n) for N in (256, 512, 1024)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 5.0)


def test_correction_is_local():
    W = log_weights(64)
    h = 1 / 64
    offsets = (np.arange(64)[None, :] - np.arange(64)[:, None]) % 64
    dist = np.minimum(offsets, 64 - offsets)
    far = dist > len(KR6_GAMMA)
    assert np.all(W[far] == h)
    assert np.all(np.diag(W) == 0)


@pytest.mark.parametrize("kind", ["single", "double", "combined"])
def test_circle_kernels_are_circulant(circle, kind):
    K = assemble(circle, kind, 32, 256).values
    for r in (1, 17, 100):
        assert np.abs(K[r] - np.roll(K[0], r)).max() <= 1e-12 * np.abs(K).max()


def test_single_layer_symmetry(kite):
    K = assemble_single(kite, 32, 256).far
    speed = kite.sample(256)["speed"]
    S = K / speed[None, :]
    assert np.abs(S - S.T).max() <= 1e-12 * np.abs(S).max()


def test_split_sums_to_quadrature_matrix(kite):
    N = 256
    K = assemble_single(kite, 32, N)
    assert K.near.nnz == 13 * N
    g = kite.sample(N)
    x, speed = g["x"], g["speed"]
    r = np.hypot(*(x[:, None, :] - x[None, :, :]).transpose(2, 0, 1))
    np.fill_diagonal(r, 1.0)
    plain = 32 * 0.25j * sp_hankel1(0, 32 * r) * speed[None, :]
    np.fill_diagonal(plain, 0.0)
    assert np.abs(K.values - plain * log_weights(N)).max() <= 1e-12 * np.abs(plain).max()


@pytest.mark.parametrize("n", [0, 4, 11])
def test_single_layer_circle_eigenvalues(circle, n):
    k, N = 32, 2048
    K = assemble_single(circle, k, N)
    f = np.exp(2j * np.pi * n * np.arange(N) / N)
    ex = circle_single_eigenvalue(n, k)
    assert np.abs(K.matvec(f) - ex * f).max() <= 1e-6 * abs(ex)


@pytest.mark.parametrize("n", [0, 3, 17])
def test_double_layer_circle_eigenvalues(circle, n):
    k, N = 32, 1024
    D = assemble_double(circle, k, N)
    f = np.exp(2j * np.pi * n * np.arange(N) / N)
    ex = circle_double_eigenvalue(n, k)
    assert np.abs(D.values @ f - ex * f).max() <= 1e-5 * abs(ex)


@pytest.mark.parametrize("curve", [make_kite(), make_star(5, 0.3)], ids=["kite", "star"])
def test_double_layer_diagonal_is_the_limit(curve):
    # well-resolved regime so the (kr)^2 log(kr) term stays below tolerance
    N = 2048
    D = assemble_double(curve, 4, N).values
    w = curve.sample(N)["speed"] / N
    i = np.arange(N)
    diag = np.diag(D) / w
    # Richardson extrapolation from offsets h and 2h on each side
    def near(l):
        return 0.5 * (D[i, (i + l) % N] / w[(i + l) % N] + D[i, (i - l) % N] / w[(i - l) % N])
    extrap = (4 * near(1) - near(2)) / 3
    assert np.abs(extrap - diag).max() <= 1e-4 * np.abs(diag).max()


def test_double_layer_is_finite_at_high_k(kite):
    D = assemble_double(kite, 128, 1024)
    assert np.all(np.isfinite(D.values))


def test_combined_eta_zero_equals_double(kite_kernels, kite):
    c0 = assemble_combined(kite, 32, 256, eta=0.0, double=kite_kernels["double"])
    assert np.array_equal(c0.values, kite_kernels["double"].values)


def test_combined_is_affine_in_eta(kite_kernels, kite):
    s, d = kite_kernels["single"], kite_kernels["double"]
    def c(eta):
        return assemble_combined(kite, 32, 256, eta=eta, single=s, double=d).values
    lhs = c(10.0) + c(50.0) - 2 * c(30.0)
    assert np.abs(lhs).max() <= 1e-12 * np.abs(c(30.0)).max()


def test_combined_formula(kite_kernels):
    s, d, c = kite_kernels["single"], kite_kernels["double"], kite_kernels["combined"]
    assert np.allclose(c.values, d.values - 1j * 32 * s.values / 32, rtol=0, atol=1e-13)
    assert c.eta == 32.0


def test_combined_frobenius_grows_like_sqrt_k():
    e = make_ellipse(1, 0.5)
    norms = [np.linalg.norm(assemble_combined(e, k, 8 * k).far) / (8 * k) for k in (32, 64, 128)]
    slopes = np.diff(np.log(norms)) / np.log(2)
    # Frobenius norm per sample ~ sqrt(k / N) sqrt(k) ... with N = 8k this is ~ k^0.5 / sqrt(8)
    assert np.all(np.abs(slopes + 0.5) < 0.25) or np.all(np.abs(slopes - 0.5) < 0.25)


def test_off_diagonal_decay_slope(kite):
    k, N = 64, 1024
    K = assemble_single(kite, k, N).far
    g = kite.sample(N)
    r = np.hypot(*(g["x"] - g["x"][0]).T)
    mask = k * r > 10
    mags = np.abs(K[0, mask]) / g["speed"][mask]
    slope = np.polyfit(np.log(k * r[mask]), np.log(mags), 1)[0]
    assert abs(slope + 0.5) < 0.1


def test_row_norms_stable_across_k(kite):
    a = np.linalg.norm(assemble_single(kite, 32, 256).values, axis=1)
    b = np.linalg.norm(assemble_single(kite, 64, 512).values, axis=1)
    ratio = np.median(b) / np.median(a)
    assert 0.5 <= ratio <= 2.0


def test_dump_round_trip(tmp_path, kite_kernels):
    K = kite_kernels["combined"]
    path = tmp_path / "k.wadk"
    dump_kernel(K, path)
    raw = path.read_bytes()
    assert raw[:4] == b"WADK"
    assert len(raw) == 4 + 4 + 8 + 4 + 1 + 8 + 8 * K.N * K.N
    back = load_kernel_dump(path)
    assert back.kind == "combined" and back.N == K.N and back.eta == K.eta
    assert np.array_equal(back.values, K.values.astype(np.complex64).astype(complex))


def test_matvec_matches_values(kite_kernels, rng):
    f = crandn(rng, 256)
    for K in kite_kernels.values():
        assert np.allclose(K.matvec(f), K.values @ f, atol=1e-12)


@pytest.mark.parametrize("N", [100, 8])
def test_bad_sizes(kite, N):
    with pytest.raises(ValueError):
        assemble_single(kite, 32, N)


def test_bad_inputs(kite):
    with pytest.raises(ValueError):
        assemble_single(kite, -1.0, 64)
    with pytest.raises(ValueError):
        assemble(kite, "hypersingular", 8, 64)
    with pytest.raises(ValueError):
        assemble_combined(kite, 8, 64, eta=-1)
    with pytest.raises(ValueError):
        DenseKernel(8, 64, "single", np.zeros((32, 32)))
