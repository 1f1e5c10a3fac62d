"""Sound-soft scattering by the combined-field integral equation.

Unknown density phi on the boundary, represented field
    u(x) = int (dG/dn_y - i eta G)(x, y) phi(y) ds_y,
and boundary equation (1/2) phi + K phi = -u_inc with K the combined kernel.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .kernels import assemble_combined, default_size
from .nsform import analyze, compress
from .special import hankel1


class ConvergenceError(RuntimeError):
    """GMRES did not reach the tolerance; ``result`` holds the partial solve."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class IncidentWave:
    direction: tuple
    k: float

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (2,) or abs(np.hypot(*d) - 1.0) > 1e-12:
            raise ValueError("incident direction must be a unit 2-vector")
        if not self.k > 0:
            raise ValueError("wavenumber must be positive")

    @classmethod
    def from_angle(cls, theta, k):
        return cls((float(np.cos(theta)), float(np.sin(theta))), float(k))

    def __call__(self, points):
        points = np.atleast_2d(points)
        d = np.asarray(self.direction)
        return np.exp(1j * self.k * (points @ d))


def incident_trace(curve, wave, N):
    """Samples of exp(i k d . x(t_j)) on the parameter grid."""
    return wave(curve.sample(N)["x"])


# ---------------------------------------------------------------------------
# GMRES
# ---------------------------------------------------------------------------


@dataclass
class GMRESResult:
    x: np.ndarray
    residuals: list
    converged: bool
    stagnated: bool = False


def gmres(matvec, b, tol=1e-8, maxit=200, stagnation_window=20, stagnation_factor=0.999):
    """Unrestarted GMRES with modified Gram-Schmidt and Givens rotations.

    Residuals are relative to |b|. Stops on convergence, on ``maxit``, on a
    Krylov breakdown short of the tolerance, or when the residual fails to drop
    by ``stagnation_factor`` over ``stagnation_window`` consecutive iterations.
    """
    b = np.asarray(b, dtype=complex)
    n = b.size
    beta = np.linalg.norm(b)
    if beta == 0:
        return GMRESResult(np.zeros(n, dtype=complex), [0.0], True)
    maxit = min(maxit, n)
    V = np.zeros((maxit + 1, n), dtype=complex)
    H = np.zeros((maxit + 1, maxit), dtype=complex)
    cs = np.zeros(maxit, dtype=complex)
    sn = np.zeros(maxit, dtype=complex)
    g = np.zeros(maxit + 1, dtype=complex)
    g[0] = beta
    V[0] = b / beta
    history = [1.0]
    converged = stagnated = False
    it = 0
    for it in range(1, maxit + 1):
        w = matvec(V[it - 1])
        for i in range(it):
            H[i, it - 1] = np.vdot(V[i], w)
            w = w - H[i, it - 1] * V[i]
        H[it, it - 1] = np.linalg.norm(w)
        # happy breakdown: the Krylov space is invariant, no further progress possible
        breakdown = H[it, it - 1] <= 1e-14 * np.abs(H[:it, it - 1]).max(initial=0.0)
        if not breakdown:
            V[it] = w / H[it, it - 1]
        for i in range(it - 1):
            a, c = H[i, it - 1], H[i + 1, it - 1]
            H[i, it - 1] = np.conj(cs[i]) * a + np.conj(sn[i]) * c
            H[i + 1, it - 1] = -sn[i] * a + cs[i] * c
        a, c = H[it - 1, it - 1], H[it, it - 1]
        r = np.hypot(abs(a), abs(c))
        cs[it - 1] = a / r if r else 1.0
        sn[it - 1] = c / r if r else 0.0
        H[it - 1, it - 1] = r
        H[it, it - 1] = 0.0
        g[it] = -sn[it - 1] * g[it - 1]
        g[it - 1] = np.conj(cs[it - 1]) * g[it - 1]
        res = abs(g[it]) / beta
        history.append(float(res))
        if res <= tol:
            converged = True
            break
        if it > stagnation_window and res > stagnation_factor * history[-1 - stagnation_window]:
            stagnated = True
            break
        if breakdown:
            # exact solution of an invariant subspace; a residual above tol means
            # the system is singular with an inconsistent right-hand side
            stagnated = True
            break
    y = np.linalg.solve(np.triu(H[:it, :it]), g[:it])
    x = V[:it].T @ y
    return GMRESResult(x, history, converged, stagnated)


# ---------------------------------------------------------------------------
# boundary integral solve
# ---------------------------------------------------------------------------


@dataclass
class SolveResult:
    density: np.ndarray
    residual_history: np.ndarray
    iterations: int
    applied_operator: str
    converged: bool
    N: int
    k: float
    eta: float
    stagnated: bool = False
    extra: dict = field(default_factory=dict)


def solve_bie(curve, k, wave, mode="dense", tol=1e-8, maxit=200, N=None, eta=None,
              epsilon=1e-2, kernel=None, form=None, raise_on_failure=True):
    """Solve (1/2) phi + K phi = -u_inc with the combined kernel (eta = k by default).

    ``mode`` is "dense" or "compressed"; the compressed operator is the
    epsilon-approximant of the nonstandard form (built here unless ``form``
    is supplied).
    """
    if not 1e-12 < tol < 1e-2:
        raise ValueError("tol must lie in (1e-12, 1e-2)")
    if mode not in ("dense", "compressed"):
        raise ValueError(f"unknown mode {mode!r}")
    N = N or (kernel.N if kernel is not None else default_size(k))
    eta = float(k) if eta is None else float(eta)
    if kernel is None and (mode == "dense" or form is None):
        kernel = assemble_combined(curve, k, N, eta)
    if mode == "dense":
        K = kernel.values

        def op(x):
            return 0.5 * x + K @ x
        label = "dense"
    else:
        if form is None:
            form = compress(analyze(kernel), epsilon, kernel)
        if form.N != N:
            raise ValueError("compressed form does not match N")

        def op(x):
            return 0.5 * x + form.apply(x)
        label = f"compressed({form.epsilon:g})"

    rhs = -incident_trace(curve, wave, N)
    out = gmres(op, rhs, tol=tol, maxit=maxit)
    result = SolveResult(
        density=out.x, residual_history=np.array(out.residuals), iterations=len(out.residuals) - 1,
        applied_operator=label, converged=out.converged, N=N, k=float(k), eta=eta,
        stagnated=out.stagnated,
    )
    if not out.converged and raise_on_failure:
        why = "stagnated" if out.stagnated else f"reached maxit={maxit}"
        raise ConvergenceError(f"GMRES {why} at residual {out.residuals[-1]:.3e}", result)
    return result


# ---------------------------------------------------------------------------
# field evaluation
# ---------------------------------------------------------------------------


def _boundary(curve, N):
    geo = curve.sample(N)
    return geo["x"], geo["normal"], geo["speed"] / N


def scattered_field(curve, density, k, eta, points, chunk=512):
    """Trapezoidal evaluation of the combined-field representation at exterior points."""
    density = np.asarray(density)
    N = density.size
    y, normal, w = _boundary(curve, N)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(points), dtype=complex)
    weighted = density * w
    near_limit = 2 * np.pi / k
    for start in range(0, len(points), chunk):
        p = points[start:start + chunk]
        diff = p[:, None, :] - y[None, :, :]
        r = np.hypot(diff[..., 0], diff[..., 1])
        rmin = r.min()
        if rmin < near_limit:
            warnings.warn(f"evaluation point within {rmin:.3g} of the boundary; "
                          "trapezoidal accuracy degrades below one wavelength", RuntimeWarning)
        proj = (diff * normal[None, :, :]).sum(-1)
        dG = 0.25j * k * hankel1(1, k * r) * proj / r
        G = 0.25j * hankel1(0, k * r)
        out[start:start + chunk] = (dG - 1j * eta * G) @ weighted
    return out


def far_field(curve, density, k, eta, angles):
    """u_inf(xhat) with u(r xhat) ~ e^{ikr} r^{-1/2} u_inf(xhat)."""
    density = np.asarray(density)
    y, normal, w = _boundary(curve, density.size)
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    xhat = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    phase = np.exp(-1j * k * (xhat @ y.T))
    factor = -1j * k * (xhat @ normal.T) - 1j * eta
    pref = np.exp(0.25j * np.pi) / np.sqrt(8 * np.pi * k)
    return pref * (factor * phase) @ (density * w)


@dataclass(frozen=True)
class RCS:
    linear: np.ndarray
    db: np.ndarray


def bistatic_rcs(far):
    """Bistatic cross section 2 pi |u_inf|^2 (2D scattering width), linear and dB."""
    lin = 2 * np.pi * np.abs(np.asarray(far)) ** 2
    with np.errstate(divide="ignore"):
        db = 10 * np.log10(lin)
    return RCS(lin, db)
