"""Rayleigh-fading decomposition of the cloner probabilities.

Each ``p_N`` is split into ``N`` squared magnitudes ``Gamma_i = |w_i|^2`` of
circular-symmetric complex Gaussians ``w_i ~ CN(0, sigma2)``, with
``sigma2 = E|w|^2``.  The Gaussians arise as limits of sums of random phasors.

Density convention: ``Re w, Im w ~ N(0, sigma2 / 2)``, hence ``|w|`` has density
``(2x / sigma2) exp(-x^2 / sigma2)`` and ``|w|^2`` is exponential with mean
``sigma2``.  With ``per_component=True`` the densities instead treat ``sigma2``
as the variance of each quadrature, giving ``(x / sigma2) exp(-x^2 / 2 sigma2)``
and ``E|w|^2 = 2 sigma2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import special

from .channel_model import ZLike, build_distribution

MIN_KS_SAMPLES = 100


@dataclass(frozen=True)
class RngStream:
    """Named, reproducible random stream.

    ``(seed, stream_id, path)`` feed a ``SeedSequence`` spawn key, so distinct
    ids give independent PCG64 streams and the same triple replays bit-exactly.
    """

    seed: int = 42
    stream_id: int = 0
    path: tuple = ()

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, i: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, (*self.path, int(i)))

    def split(self, count: int) -> list:
        return [self.child(i) for i in range(count)]


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    """A stream value yields a fresh generator; a live generator is used as is."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _check_sigma2(sigma2):
    sigma2 = float(sigma2)
    if not (sigma2 > 0.0 and math.isfinite(sigma2)):
        raise ValueError(f"sigma2 must be a positive finite variance, got {sigma2}")
    return sigma2


def _scalar_or_array(a, size):
    return a[0] if size is None else a


def sample_phasor_sum(j: int, sigma2: float, rng: RngLike, size: Optional[int] = None):
    """Sum of ``j`` phasors ``r e^{i phi}``, ``phi ~ U[0, 2 pi)``, ``r = sqrt(sigma2 / j)``.

    The second moment is ``sigma2`` for every ``j``; as ``j`` grows the sum tends
    to ``CN(0, sigma2)``.  Returns a complex scalar, or an array of ``size`` draws.
    """
    if int(j) != j or j < 1:
        raise ValueError(f"phasor count j must be a positive integer, got {j!r}")
    sigma2 = _check_sigma2(sigma2)
    gen = as_generator(rng)
    count = 1 if size is None else int(size)
    r = math.sqrt(sigma2 / j)
    out = np.zeros(count, dtype=complex)
    # accumulate one phasor index at a time to keep memory at O(size)
    for _ in range(int(j)):
        out += np.exp(1j * gen.uniform(0.0, 2.0 * np.pi, count))
    out *= r
    return _scalar_or_array(out, size)


def sample_complex_gaussian(sigma2: float, rng: RngLike, size: Optional[int] = None):
    """Draws of ``CN(0, sigma2)``: independent real and imaginary parts of variance ``sigma2 / 2``."""
    sigma2 = _check_sigma2(sigma2)
    gen = as_generator(rng)
    count = 1 if size is None else int(size)
    scale = math.sqrt(sigma2 / 2.0)
    parts = gen.normal(0.0, scale, size=(count, 2))
    out = parts[:, 0] + 1j * parts[:, 1]
    return _scalar_or_array(out, size)


def _nonneg(x, what="x"):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError(f"{what} must be nonnegative")
    return x


def _ret(x, out):
    return float(out) if np.ndim(x) == 0 else out


def rayleigh_pdf(x, sigma2: float, per_component: bool = False):
    """Density of ``|w|``.

    Default: ``(2x / sigma2) exp(-x^2 / sigma2)``, consistent with ``sigma2 = E|w|^2``.
    ``per_component`` reads ``sigma2`` as the variance of each quadrature:
    ``(x / sigma2) exp(-x^2 / (2 sigma2))``.
    """
    sigma2 = _check_sigma2(sigma2)
    xa = _nonneg(x)
    if per_component:
        out = xa / sigma2 * np.exp(-xa * xa / (2.0 * sigma2))
    else:
        out = 2.0 * xa / sigma2 * np.exp(-xa * xa / sigma2)
    return _ret(x, out)


def rayleigh_cdf(x, sigma2: float, per_component: bool = False):
    sigma2 = _check_sigma2(sigma2)
    xa = np.maximum(np.asarray(x, dtype=float), 0.0)
    scale = 2.0 * sigma2 if per_component else sigma2
    return _ret(x, -np.expm1(-xa * xa / scale))


def exponential_pdf(x, sigma2: float):
    """Density ``exp(-x / sigma2) / sigma2`` of ``|w|^2``."""
    sigma2 = _check_sigma2(sigma2)
    xa = _nonneg(x)
    return _ret(x, np.exp(-xa / sigma2) / sigma2)


def exponential_cdf(x, sigma2: float):
    sigma2 = _check_sigma2(sigma2)
    xa = np.maximum(np.asarray(x, dtype=float), 0.0)
    return _ret(x, -np.expm1(-xa / sigma2))


def gamma_cdf(x, shape: int, sigma2: float):
    """CDF of a sum of ``shape`` independent exponentials of mean ``sigma2``."""
    sigma2 = _check_sigma2(sigma2)
    xa = np.maximum(np.asarray(x, dtype=float), 0.0)
    return _ret(x, special.gammainc(shape, xa / sigma2))


def normal_cdf(x, variance: float):
    return _ret(x, special.ndtr(np.asarray(x, dtype=float) / math.sqrt(variance)))


MODELS = ("rayleigh", "exponential", "gamma", "normal")


def model_cdf(model: str, sigma2: float = 1.0, shape: Optional[int] = None, per_component: bool = False) -> Callable:
    """CDF callable for a named fit model.

    ``normal`` is the law of one quadrature component of ``CN(0, sigma2)``,
    i.e. ``N(0, sigma2 / 2)``.
    """
    sigma2 = _check_sigma2(sigma2)
    if model == "rayleigh":
        return lambda x: rayleigh_cdf(x, sigma2, per_component)
    if model == "exponential":
        return lambda x: exponential_cdf(x, sigma2)
    if model == "gamma":
        if shape is None or shape < 1:
            raise ValueError("gamma model needs a positive integer shape")
        return lambda x: gamma_cdf(x, shape, sigma2)
    if model == "normal":
        return lambda x: normal_cdf(x, sigma2 / 2.0)
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def ks_statistic(samples, cdf: Callable) -> float:
    """Kolmogorov-Smirnov distance ``sup |F_emp - F|`` of a batch to a continuous CDF."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n < MIN_KS_SAMPLES:
        raise ValueError(f"need at least {MIN_KS_SAMPLES} samples for a KS fit, got {n}")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(min(1.0, max(d_plus, d_minus, 0.0)))


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic critical value ``K^{-1}(1 - alpha) / sqrt(n)`` of the Kolmogorov distribution."""
    if n < 1 or not 0.0 < alpha < 1.0:
        raise ValueError("need n >= 1 and 0 < alpha < 1")
    return float(special.kolmogi(alpha) / math.sqrt(n))


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray
    model: str
    sigma2: float
    ks_statistic: float
    shape: Optional[int] = None

    @property
    def n(self) -> int:
        return int(self.values.size)

    def critical_value(self, alpha: float = 0.01) -> float:
        return ks_critical_value(self.n, alpha)

    def passes(self, alpha: float = 0.01) -> bool:
        return self.ks_statistic <= self.critical_value(alpha)


def fit_batch(values, model: str, sigma2: float = 1.0, shape: Optional[int] = None) -> SampleBatch:
    values = np.asarray(values, dtype=float)
    stat = ks_statistic(values, model_cdf(model, sigma2, shape))
    return SampleBatch(values, model, float(sigma2), stat, shape)


@dataclass(frozen=True)
class CoefficientVector:
    """Decomposition ``p = sum_i Gamma_i`` with ``sum_i sqrt(Gamma_i) = tau sqrt(p)``."""

    N: int
    gammas: np.ndarray
    tau: float
    target_p: float
    raw_sum: float

    @property
    def magnitudes(self) -> np.ndarray:
        """The Rayleigh coefficients ``sqrt(Gamma_i)``."""
        return np.sqrt(self.gammas)

    @property
    def squared_norm(self) -> float:
        return math.fsum(self.gammas)


def draw_unscaled_gammas(N: int, sigma2: float, rng: RngLike, size: Optional[int] = None) -> np.ndarray:
    """``|w_i|^2`` for ``i = 1..N``; shape ``(N,)`` or ``(size, N)``."""
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    count = 1 if size is None else int(size)
    w = sample_complex_gaussian(sigma2, rng, size=count * int(N))
    g = (w.real**2 + w.imag**2).reshape(count, int(N))
    return g[0] if size is None else g


def build_coefficient_vector(p_target: float, N: int, sigma2: float, rng: RngLike) -> CoefficientVector:
    """Draw ``N`` exponential ``Gamma_i`` and rescale so that they sum to ``p_target``.

    A fixed-sum set of exponentials is a conditioned ensemble, realized here by
    draw-then-rescale; ``tau`` follows from the rescaled magnitudes.
    """
    p_target = float(p_target)
    if not 0.0 < p_target <= 1.0:
        raise ValueError(f"target probability must satisfy 0 < p <= 1, got {p_target}")
    gen = as_generator(rng)
    for _ in range(2):
        raw = draw_unscaled_gammas(N, sigma2, gen)
        raw_sum = math.fsum(raw)
        if raw_sum > 0.0:
            break
    else:
        raise RuntimeError("degenerate all-zero draw for coefficient vector, twice in a row")
    gammas = raw * (p_target / raw_sum)
    gammas.setflags(write=False)
    tau = math.fsum(np.sqrt(gammas)) / math.sqrt(p_target)
    return CoefficientVector(int(N), gammas, tau, p_target, raw_sum)


def total_probability_check(z: ZLike, tail_tol: float = 1e-9, sigma2: float = 1.0, rng: RngLike = RngStream()) -> float:
    """Sum of every ``Gamma_i`` over the truncated cloner ensemble; equals ``1 - tail_mass``.

    Zero-probability cloners (only at ``z = 0``, ``N >= 2``) are never reached
    since the truncation stops at ``n_max = 1`` there.
    """
    dist = build_distribution(z, tail_tol)
    streams = rng.split(dist.n_max) if isinstance(rng, RngStream) else [rng] * dist.n_max
    parts = []
    for (N, p), stream in zip(dist.rows(), streams):
        parts.extend(build_coefficient_vector(p, N, sigma2, stream).gammas)
    return math.fsum(parts)
