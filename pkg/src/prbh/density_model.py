"""Chi-square density approximation of the cloner distribution in ``z``.

    f_N(z) = (r z)^(N-1) exp(-r z) / (N-1)!,   r = 10 by default,

which is ``2 * chi2_{2N}(2 r z)``.  As a function of ``z`` it integrates to
``1 / r`` over ``[0, inf)``; it is a density in ``x = r z``, not in ``z``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats
from scipy.integrate import trapezoid

from .channel_model import cloner_probability

DEFAULT_RATE = 10.0


def _check_n(N):
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    return int(N)


def f_density(z, N: int, rate: float = DEFAULT_RATE):
    """``(rate z)^(N-1) exp(-rate z) / (N-1)!``, scalar or elementwise."""
    N = _check_n(N)
    za = np.asarray(z, dtype=float)
    if np.any(za < 0):
        raise ValueError("z must be nonnegative")
    x = rate * za
    out = x ** (N - 1) * np.exp(-x) / math.factorial(N - 1)
    return float(out) if np.ndim(z) == 0 else out


def chi_square_pdf(x, dof: int):
    """Chi-square density with an even number of degrees of freedom."""
    if isinstance(dof, bool) or int(dof) != dof or dof <= 0 or dof % 2:
        raise ValueError(f"degrees of freedom must be a positive even integer, got {dof!r}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("x must be nonnegative")
    out = stats.chi2.pdf(xa, int(dof))
    return float(out) if np.ndim(x) == 0 else out


def cdf_small_y(y, N: int):
    """Small-argument CDF ``y^N / N!``; drops the ``exp(-x)`` factor of the integrand."""
    N = _check_n(N)
    ya = np.asarray(y, dtype=float)
    if np.any(ya < 0):
        raise ValueError("y must be nonnegative")
    if ya.ndim == 0:
        return float(ya) ** N / math.factorial(N)
    return ya**N / math.factorial(N)


def cdf_exact(y, N: int):
    """Exact counterpart of ``cdf_small_y``: regularized lower incomplete gamma ``P(N, y)``."""
    N = _check_n(N)
    out = special.gammainc(N, np.asarray(y, dtype=float))
    return float(out) if np.ndim(y) == 0 else out


@dataclass(frozen=True)
class DensityCurve:
    N: int
    z: np.ndarray
    f: np.ndarray
    rate: float = DEFAULT_RATE

    def __post_init__(self):
        if self.z.shape != self.f.shape:
            raise ValueError("z and f must have the same length")
        if self.z.size and (self.z[0] < 0 or self.z[-1] >= 1 or np.any(np.diff(self.z) <= 0)):
            raise ValueError("curve abscissae must be strictly increasing within [0, 1)")
        if np.any(self.f < 0):
            raise ValueError("density values must be nonnegative")

    @property
    def points(self):
        return list(zip(self.z.tolist(), self.f.tolist()))

    def argmax(self) -> float:
        return float(self.z[int(np.argmax(self.f))])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["z", "f"])
        for zi, fi in zip(self.z, self.f):
            w.writerow([f"{zi:.17g}", f"{fi:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, N: int, rate: float = DEFAULT_RATE) -> "DensityCurve":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["z", "f"]:
            raise ValueError("expected a 'z,f' header row")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)
        return cls(N, data[:, 0].copy(), data[:, 1].copy(), rate)


def z_grid(z_steps: int) -> np.ndarray:
    """``z_steps`` uniform points ``i / z_steps`` covering ``[0, 1)``."""
    if int(z_steps) != z_steps or z_steps < 2:
        raise ValueError(f"z_steps must be an integer >= 2, got {z_steps!r}")
    return np.arange(int(z_steps)) / int(z_steps)


def density_curve(N: int, z_steps: int = 200, rate: float = DEFAULT_RATE) -> DensityCurve:
    zs = z_grid(z_steps)
    return DensityCurve(_check_n(N), zs, f_density(zs, N, rate), rate)


def _unit_normalized(zs, ys):
    return ys / trapezoid(ys, zs)


def fit_distance(N: int, zs=None, rate: float = DEFAULT_RATE) -> float:
    """L1 gap on the grid between the normalized exact ``p_N(z)`` and normalized ``f_N(z)``.

    Both curves are scaled to unit trapezoidal area over the grid before
    differencing. The default grid has 1000 points on ``[0, 1)``.
    """
    zs, exact, approx = normalized_curves(N, zs, rate)
    return float(trapezoid(np.abs(exact - approx), zs))


def normalized_curves(N: int, zs=None, rate: float = DEFAULT_RATE):
    """The two unit-area curves compared by ``fit_distance``."""
    N = _check_n(N)
    zs = z_grid(1000) if zs is None else np.asarray(zs, dtype=float)
    exact = np.array([cloner_probability(float(z), N) for z in zs])
    return zs, _unit_normalized(zs, exact), _unit_normalized(zs, f_density(zs, N, rate))
