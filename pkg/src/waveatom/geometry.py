"""Smooth closed curves given by truncated Fourier series in t in [0, 1).

Each coordinate is x_i(t) = sum_h cos_i[h] cos(2 pi h t) + sin_i[h] sin(2 pi h t),
h = 0..H. Curves are oriented counterclockwise so that (x2', -x1')/|x'| is the
exterior normal.
"""

import json
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class CurvePoint:
    position: np.ndarray
    velocity: np.ndarray
    speed: float
    unit_normal: np.ndarray
    curvature: float


@dataclass(frozen=True, eq=False)
class Curve:
    cos1: np.ndarray
    sin1: np.ndarray
    cos2: np.ndarray
    sin2: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=float) for a in (self.cos1, self.sin1, self.cos2, self.sin2)]
        H = max(len(a) for a in arrays) - 1
        if H < 1:
            raise ValueError("a curve needs at least one nonconstant harmonic")
        padded = [np.pad(a, (0, H + 1 - len(a))) for a in arrays]
        for a in padded:
            a.setflags(write=False)
        for field, a in zip(("cos1", "sin1", "cos2", "sin2"), padded):
            object.__setattr__(self, field, a)

    @property
    def H(self):
        return len(self.cos1) - 1

    def derivatives(self, t, order=2):
        """Positions and the first ``order`` derivatives at parameters ``t``.

        Returns a list of arrays of shape (len(t), 2): [x, x', x'', ...].
        """
        t = np.atleast_1d(np.asarray(t, dtype=float)) % 1.0
        h = np.arange(self.H + 1)
        ang = TWO_PI * np.outer(t, h)
        c, s = np.cos(ang), np.sin(ang)
        out = []
        for d in range(order + 1):
            # d-th derivative of cos(wt) / sin(wt), w = 2 pi h
            w = (TWO_PI * h) ** d
            phase = d % 4
            if phase == 0:
                dc, ds = c, s
            elif phase == 1:
                dc, ds = -s, c
            elif phase == 2:
                dc, ds = -c, -s
            else:
                dc, ds = s, -c
            x1 = (dc * w) @ self.cos1 + (ds * w) @ self.sin1
            x2 = (dc * w) @ self.cos2 + (ds * w) @ self.sin2
            out.append(np.stack([x1, x2], axis=-1))
        return out

    def sample(self, N):
        """Geometry on the uniform grid t_j = j/N.

        Returns a dict with ``t``, ``x`` (N, 2), ``dx``, ``ddx``, ``speed``,
        ``normal`` (exterior, unit) and ``curvature``.
        """
        t = np.arange(N) / N
        x, dx, ddx = self.derivatives(t, order=2)
        speed = np.hypot(dx[:, 0], dx[:, 1])
        normal = np.stack([dx[:, 1], -dx[:, 0]], axis=-1) / speed[:, None]
        curvature = (dx[:, 0] * ddx[:, 1] - dx[:, 1] * ddx[:, 0]) / speed**3
        return {"t": t, "x": x, "dx": dx, "ddx": ddx, "speed": speed,
                "normal": normal, "curvature": curvature}

    def to_dict(self):
        return {"cos1": self.cos1.tolist(), "sin1": self.sin1.tolist(),
                "cos2": self.cos2.tolist(), "sin2": self.sin2.tolist(), "H": self.H}

    @classmethod
    def from_dict(cls, d, name="custom"):
        arrays = [np.asarray(d[f], dtype=float) for f in _FIELDS]
        if "H" in d:
            H = int(d["H"])
            for f, a in zip(_FIELDS, arrays):
                if len(a) > H + 1 and np.any(a[H + 1:]):
                    raise ValueError(f"{f} carries harmonics above declared H={H}")
            arrays = [np.pad(a[: H + 1], (0, H + 1 - len(a[: H + 1]))) for a in arrays]
        return cls(*arrays, name=name)


_FIELDS = ("cos1", "sin1", "cos2", "sin2")


def save_curve(curve, path):
    with open(path, "w") as fh:
        json.dump(curve.to_dict(), fh, indent=2)


def load_curve(path):
    with open(path) as fh:
        return Curve.from_dict(json.load(fh), name=str(path))


def make_ellipse(a=1.0, b=0.5):
    if not (a > 0 and b > 0):
        raise ValueError("ellipse semi-axes must be positive")
    return Curve([0.0, a], [0.0, 0.0], [0.0, 0.0], [0.0, b], name=f"ellipse({a:g},{b:g})")


def make_kite():
    """x(t) = (cos 2 pi t + 0.65 cos 4 pi t - 0.65, 1.5 sin 2 pi t)."""
    return Curve([-0.65, 1.0, 0.65], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.5, 0.0], name="kite")


def make_star(lobes=5, amplitude=0.3):
    """Polar curve r(theta) = 1 + amplitude cos(lobes theta), theta = 2 pi t."""
    if int(lobes) != lobes or lobes < 3:
        raise ValueError("star needs an integer number of lobes >= 3")
    if not 0 < amplitude < 1:
        raise ValueError("star amplitude must lie in (0, 1)")
    p = int(lobes)
    H = p + 1
    cos1, sin1, cos2, sin2 = (np.zeros(H + 1) for _ in range(4))
    # r cos(th) = cos th + a/2 [cos (p+1)th + cos (p-1)th]
    # r sin(th) = sin th + a/2 [sin (p+1)th - sin (p-1)th]
    cos1[1] += 1.0
    cos1[p + 1] += amplitude / 2
    cos1[p - 1] += amplitude / 2
    sin2[1] += 1.0
    sin2[p + 1] += amplitude / 2
    sin2[p - 1] -= amplitude / 2
    return Curve(cos1, sin1, cos2, sin2, name=f"star({p},{amplitude:g})")


def evaluate(curve, t):
    """Single-point evaluation returning a :class:`CurvePoint`."""
    x, dx, ddx = (a[0] for a in curve.derivatives([t], order=2))
    speed = float(np.hypot(*dx))
    normal = np.array([dx[1], -dx[0]]) / speed
    curvature = float((dx[0] * ddx[1] - dx[1] * ddx[0]) / speed**3)
    return CurvePoint(position=x, velocity=dx, speed=speed, unit_normal=normal, curvature=curvature)


def chord(curve, s, t):
    xs, xt = curve.derivatives([s, t], order=0)[0]
    return float(np.hypot(*(xs - xt)))


def circle_distance(s, t):
    """|e^{2 pi i s} - e^{2 pi i t}| = 2 |sin(pi (s - t))|."""
    return np.abs(2.0 * np.sin(np.pi * (np.asarray(s) - np.asarray(t))))


def regularity_constant(curve, grid_size=2048):
    """min over grid pairs s != t of |x(s) - x(t)| / |e^{2 pi i s} - e^{2 pi i t}|.

    A nonpositive (or numerically zero) value flags a self-intersecting curve.
    """
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    x = curve.sample(grid_size)["x"]
    best = np.inf
    # pairs (i, i + l) for l = 1..grid_size//2 cover every unordered pair
    for l in range(1, grid_size // 2 + 1):
        diff = x - np.roll(x, -l, axis=0)
        ratio = np.hypot(diff[:, 0], diff[:, 1]) / (2.0 * np.sin(np.pi * l / grid_size))
        best = min(best, float(ratio.min()))
    return best


SHAPES = {
    "ellipse": make_ellipse,
    "kite": make_kite,
    "star": make_star,
}
