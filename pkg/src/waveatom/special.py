"""Hankel functions of the first kind, orders 0 and 1, for real positive arguments.

Three evaluation regimes, chosen per element of the input array:

* ``x < SERIES_MAX``: ascending power series for J_n and Y_n.
* ``SERIES_MAX <= x < ASYMPTOTIC_MIN``: Steed's method (continued fractions
  CF1 for J_0'/J_0 and CF2 for (J_0' + iY_0')/(J_0 + iY_0), closed with the
  Wronskian).
* ``x >= ASYMPTOTIC_MIN``: Hankel's large-argument expansion.

Everything is vectorized over numpy arrays; scalars are accepted and
returned as Python complex numbers.
"""

import numpy as np

EULER_GAMMA = 0.57721566490153286061

SERIES_MAX = 6.0
ASYMPTOTIC_MIN = 25.0

_SERIES_TERMS = 30
_CF1_ITERATIONS = 64
_CF2_ITERATIONS = 32
_ASYMPTOTIC_TERMS = 22
_FPMIN = 1e-300


def _asymptotic_coefficients(n, terms):
    # a_k(n) in H_n(x) ~ sqrt(2/(pi x)) e^{i(x - n pi/2 - pi/4)} sum_k i^k a_k / x^k
    mu = 4.0 * n * n
    coeffs = [1.0 + 0j]
    a = 1.0
    for k in range(1, terms):
        a *= (mu - (2 * k - 1) ** 2) / (8.0 * k)
        coeffs.append(a * 1j**k)
    return np.array(coeffs)


_ASYM = {n: _asymptotic_coefficients(n, _ASYMPTOTIC_TERMS) for n in (0, 1)}
# e^{-i(n pi/2 + pi/4)}
_PHASE = {n: np.exp(-1j * (n * np.pi / 2 + np.pi / 4)) for n in (0, 1)}


def _series(x):
    """Return (J0, Y0, J1, Y1) by ascending series; accurate for x < ~6."""
    q = -0.25 * x * x
    half = 0.5 * x
    # J0 = sum t_k, t_k = q^k / (k!)^2 ; J1 = (x/2) sum s_k, s_k = q^k / (k!(k+1)!)
    t = np.ones_like(x)
    s = np.ones_like(x)
    j0 = t.copy()
    j1 = s.copy()
    y0_sum = np.zeros_like(x)
    y1_sum = s.copy()  # k = 0 term: (H_0 + H_1) s_0 = 1
    harmonic = 0.0
    for k in range(1, _SERIES_TERMS):
        t = t * q / (k * k)
        s = s * q / (k * (k + 1))
        harmonic += 1.0 / k
        j0 += t
        j1 += s
        y0_sum += harmonic * t
        y1_sum += (2.0 * harmonic + 1.0 / (k + 1)) * s  # (H_k + H_{k+1}) s_k
    j1 *= half
    log_term = np.log(half) + EULER_GAMMA
    y0 = (2.0 / np.pi) * (log_term * j0 - y0_sum)
    y1 = (2.0 / np.pi) * log_term * j1 - 2.0 / (np.pi * x) - (half / np.pi) * y1_sum
    return j0, y0, j1, y1


def _steed(x):
    """Return (J0, Y0, J1, Y1) by Steed's method; intended for 2 <= x <= ~30."""
    xi = 1.0 / x
    xi2 = 2.0 * xi
    w = xi2 / np.pi

    # CF1 (modified Lentz) for f = J0'/J0; the sign of J0 is tracked in isign.
    h = np.full_like(x, _FPMIN)
    b = np.zeros_like(x)
    d = np.zeros_like(x)
    c = h.copy()
    isign = np.ones_like(x)
    for _ in range(_CF1_ITERATIONS):
        b = b + xi2
        d = b - d
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b - 1.0 / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        h = c * d * h
        isign = np.where(d < 0, -isign, isign)
    f = h

    # CF2 for p + iq
    a = 0.25
    p = -0.5 * xi
    q = np.ones_like(x)
    br = 2.0 * x
    bi = 2.0
    fact = a * xi / (p * p + q * q)
    cr = br + q * fact
    ci = bi + p * fact
    den = br * br + bi * bi
    dr = br / den
    di = -bi / den
    dlr = cr * dr - ci * di
    dli = cr * di + ci * dr
    p, q = p * dlr - q * dli, p * dli + q * dlr
    for i in range(2, _CF2_ITERATIONS):
        a += 2 * (i - 1)
        bi += 2.0
        dr = a * dr + br
        di = a * di + bi
        fact = a / (cr * cr + ci * ci)
        cr = br + cr * fact
        ci = bi - ci * fact
        den = dr * dr + di * di
        dr = dr / den
        di = -di / den
        dlr = cr * dr - ci * di
        dli = cr * di + ci * dr
        p, q = p * dlr - q * dli, p * dli + q * dlr

    gam = (p - f) / q
    j0 = isign * np.sqrt(w / ((p - f) * gam + q))
    y0 = j0 * gam
    y0p = y0 * (p + q / gam)
    return j0, y0, -f * j0, -y0p


def _asymptotic_scaled(n, x):
    """e^{-ix} H_n(x) from the large-argument expansion."""
    inv = 1.0 / x
    coeffs = _ASYM[n]
    acc = np.full(x.shape, coeffs[-1], dtype=complex)
    for c in coeffs[-2::-1]:
        acc = acc * inv + c
    return np.sqrt(2.0 / (np.pi * x)) * _PHASE[n] * acc


def _check_args(n, x):
    if n not in (0, 1):
        raise ValueError(f"order must be 0 or 1, got {n!r}")
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)) or np.any(~np.isfinite(arr)):
        raise ValueError("argument must be finite and strictly positive")
    return arr


def _evaluate(n, arr, scaled):
    out = np.empty(arr.shape, dtype=complex)
    small = arr < SERIES_MAX
    mid = (arr >= SERIES_MAX) & (arr < ASYMPTOTIC_MIN)
    large = arr >= ASYMPTOTIC_MIN

    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        for mask, fn in ((small, _series), (mid, _steed)):
            if np.any(mask):
                xs = arr[mask]
                j0, y0, j1, y1 = fn(xs)
                val = (j0 + 1j * y0) if n == 0 else (j1 + 1j * y1)
                if scaled:
                    val = val * np.exp(-1j * xs)
                out[mask] = val
        if np.any(large):
            xs = arr[large]
            val = _asymptotic_scaled(n, xs)
            if not scaled:
                val = val * (np.cos(xs) + 1j * np.sin(xs))
            out[large] = val

    if not np.all(np.isfinite(out)):
        raise OverflowError("Hankel function magnitude exceeds the floating point range")
    return out


def _wrap(result, x):
    if np.ndim(x) == 0:
        return complex(result.reshape(()))
    return result


def hankel1(n, x):
    """H_n^{(1)}(x) = J_n(x) + i Y_n(x) for n in {0, 1} and real x > 0.

    Relative accuracy is about 1e-14 on [1e-8, 1e6]. Raises ``ValueError``
    for a bad order or nonpositive argument and ``OverflowError`` when the
    result is not representable (Y_1 near x = 0).
    """
    arr = _check_args(n, x)
    return _wrap(_evaluate(n, arr, scaled=False), x)


def hankel1_scaled(n, x):
    """Non-oscillatory factor e^{-ix} H_n^{(1)}(x); same modulus as ``hankel1``."""
    arr = _check_args(n, x)
    return _wrap(_evaluate(n, arr, scaled=True), x)


def bessel_jy(n, x):
    """Return (J_n(x), Y_n(x)) as real arrays; thin convenience over ``hankel1``."""
    h = np.asarray(hankel1(n, x))
    return h.real, h.imag


def hankel_lemma_envelope(n, x):
    """Reference envelope max(x^{-1/2}, x^{-n}) (or 1 + |log x| for n = 0, x < 1).

    Used to normalize |H_n(x)| when checking the smoothness bounds; the
    ratio |H_n(x)| / envelope stays between two positive constants.
    """
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.where(x >= 1.0, x**-0.5, 1.0 + np.abs(np.log(x)))
    return np.where(x >= 1.0, x**-0.5, x ** (-float(n)))


__all__ = [
    "hankel1",
    "hankel1_scaled",
    "bessel_jy",
    "hankel_lemma_envelope",
    "SERIES_MAX",
    "ASYMPTOTIC_MIN",
    "EULER_GAMMA",
]
