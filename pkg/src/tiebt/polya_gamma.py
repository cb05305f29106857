"""Exact Polya-Gamma sampling via the alternating-series accept-reject method.

PG(1, c) draws use the Devroye-style sampler: a mixture proposal of a
truncated exponential (above the truncation point 0.64) and a truncated
inverse-Gaussian (below it), with acceptance decided by squeezing the
alternating partial sums of the Jacobi-theta series.  PG(b, c) for integer
b >= 1 is the sum of b independent PG(1, c) draws.

The scalar kernels are numba-compiled and consume a shared numpy Generator,
so sampling is deterministic given the seed and interleaves safely with
interpreted code using the same stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

# Conventional truncation point splitting the two proposal branches.
TRUNCATION = 0.64


@dataclass(frozen=True)
class PGParams:
    """Parameters of PG(b, c): integer shape b >= 1 and real tilt c."""

    b: int
    c: float

    def __post_init__(self):
        _validate(self.b, self.c)


def _validate(b, c) -> None:
    if int(b) != b or b < 1:
        raise ValueError(f"PG shape b must be a positive integer, got {b!r}")
    if not math.isfinite(c):
        raise ValueError(f"PG tilt c must be finite, got {c!r}")


@njit(cache=True)
def _norm_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@njit(cache=True)
def _piecewise_coef(n, x):
    # n-th coefficient of the alternating series for the J*(1, .) density,
    # in the form appropriate to whichever side of the truncation x lies.
    if x > TRUNCATION:
        return (
            math.pi * (n + 0.5) * math.exp(-((n + 0.5) ** 2) * math.pi**2 * x / 2.0)
        )
    return (
        math.pi
        * (n + 0.5)
        * (2.0 / (math.pi * x)) ** 1.5
        * math.exp(-2.0 * (n + 0.5) ** 2 / x)
    )


@njit(cache=True)
def _mass_texpon(z):
    # Probability that the proposal mixture uses the exponential branch.
    t = TRUNCATION
    fz = math.pi**2 / 8.0 + z * z / 2.0
    b = math.sqrt(1.0 / t) * (t * z - 1.0)
    a = -math.sqrt(1.0 / t) * (t * z + 1.0)
    x0 = math.log(fz) + fz * t
    xb = x0 - z + np.log(_norm_cdf(b))
    xa = x0 + z + np.log(_norm_cdf(a))
    qdivp = 4.0 / math.pi * (math.exp(xb) + math.exp(xa))
    return 1.0 / (1.0 + qdivp)


@njit(cache=True)
def _sample_truncated_igauss(z, rng):
    # Inverse-Gaussian(mu = 1/z, lambda = 1) restricted to (0, TRUNCATION].
    t = TRUNCATION
    if z < 1.0 / t:
        # Large mean: rejection against the 1/sqrt(x) tail with an exp tilt.
        while True:
            while True:
                e1 = rng.exponential()
                e2 = rng.exponential()
                if e1 * e1 <= 2.0 * e2 / t:
                    break
            x = t / ((1.0 + t * e1) ** 2)
            if rng.random() <= math.exp(-0.5 * z * z * x):
                return x
    mu = 1.0 / z
    x = t + 1.0
    while x > t:
        y = rng.normal() ** 2
        x = mu + 0.5 * mu * mu * y - 0.5 * mu * math.sqrt(4.0 * mu * y + (mu * y) ** 2)
        if rng.random() > mu / (mu + x):
            x = mu * mu / x
    return x


@njit(cache=True)
def _sample_pg1(c, rng):
    z = abs(c) * 0.5
    fz = math.pi**2 / 8.0 + z * z / 2.0
    while True:
        if rng.random() < _mass_texpon(z):
            x = TRUNCATION + rng.exponential() / fz
        else:
            x = _sample_truncated_igauss(z, rng)
        # Squeeze against the alternating partial sums.
        s = _piecewise_coef(0, x)
        y = rng.random() * s
        n = 0
        accepted = False
        while True:
            n += 1
            if n % 2 == 1:
                s -= _piecewise_coef(n, x)
                if y <= s:
                    accepted = True
                    break
            else:
                s += _piecewise_coef(n, x)
                if y > s:
                    break
        if accepted:
            return 0.25 * x


@njit(cache=True)
def _sample_pg_int(b, c, rng):
    total = 0.0
    for _ in range(b):
        total += _sample_pg1(c, rng)
    return total


@njit(cache=True)
def _sample_pg_batch(b_arr, c_arr, out, rng):
    for k in range(b_arr.shape[0]):
        out[k] = _sample_pg_int(b_arr[k], c_arr[k], rng)


def sample_pg(params: PGParams | int, c: float | None = None, *, rng) -> float:
    """Draw once from PG(b, c).

    Accepts either a PGParams or ``sample_pg(b, c, rng=rng)``.
    """
    if isinstance(params, PGParams):
        b, c = params.b, params.c
    else:
        b = params
        _validate(b, c)
    return float(_sample_pg_int(int(b), float(c), rng))


def sample_pg_batch(b_arr, c_arr, rng) -> np.ndarray:
    """Independent draws z_k ~ PG(b_arr[k], c_arr[k])."""
    b_arr = np.ascontiguousarray(b_arr, dtype=np.int64)
    c_arr = np.ascontiguousarray(c_arr, dtype=np.float64)
    if b_arr.shape != c_arr.shape:
        raise ValueError("b and c arrays must have matching shapes")
    if b_arr.size and b_arr.min() < 1:
        raise ValueError("PG shape b must be a positive integer")
    if c_arr.size and not np.isfinite(c_arr).all():
        raise ValueError("PG tilt c must be finite")
    out = np.empty(b_arr.shape[0], dtype=np.float64)
    _sample_pg_batch(b_arr, c_arr, out, rng)
    return out


def draw_pg(b: int, c: float, size: int, rng) -> np.ndarray:
    """``size`` iid draws from PG(b, c)."""
    _validate(b, c)
    return sample_pg_batch(
        np.full(size, b, dtype=np.int64), np.full(size, c, dtype=np.float64), rng
    )


def pg_mean(b: int, c: float) -> float:
    """E[z] for z ~ PG(b, c): b * tanh(c/2) / (2c), with limit b/4 at c = 0."""
    if c == 0.0:
        return b / 4.0
    return b * math.tanh(c / 2.0) / (2.0 * c)


def pg_variance(b: int, c: float) -> float:
    """Var[z] for z ~ PG(b, c), limit b/24 at c = 0."""
    if abs(c) < 1e-4:
        # sinh(c) - c cancels catastrophically; the limit is accurate here.
        return b / 24.0
    return b * (math.sinh(c) - c) / (4.0 * c**3 * math.cosh(c / 2.0) ** 2)


def pg_identity_check(
    a: float, b: int, x: float, n_samples: int, rng
) -> tuple[float, float]:
    """Monte Carlo check of the logistic-linearisation identity.

    Returns (lhs, rhs_estimate) where lhs = (e^x)^a / (1 + e^x)^b and the
    right-hand side is 2^{-b} e^{(a - b/2) x} E[e^{-z x^2 / 2}] estimated over
    draws z ~ PG(b, 0).
    """
    _validate(b, x)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    lhs = math.exp(a * x - b * np.logaddexp(0.0, x))
    z = draw_pg(b, 0.0, n_samples, rng)
    rhs = (
        2.0 ** (-b)
        * math.exp((a - b / 2.0) * x)
        * float(np.mean(np.exp(-z * x * x / 2.0)))
    )
    return lhs, rhs
