"""First exit of Brownian motion from a symmetric interval.

Exit from [-a, a] started at 0 scales as a**2 times the exit from [-1, 1],
so the unit-interval distribution function is the only numerical object
required. Two complementary alternating series cover the two regimes:

* t >= 0.05: spectral series for the survival probability,
      P(tau > t) = sum_j (-1)**j * (4/pi) / (2j+1) * exp(-(2j+1)**2 * pi**2 * t / 8).
  Terms decay monotonically there, so truncating when the next term drops
  below 1e-12 bounds the error by 1e-12.

* t < 0.05: Gaussian image series for the distribution function itself,
      P(tau <= t) = 4 * [Q(1/sqrt(t)) - Q(3/sqrt(t)) + Q(5/sqrt(t)) - ...]
  with Q the standard normal upper tail. Computing F directly avoids the
  catastrophic cancellation of 1 - (spectral sum) when F is tiny.

Sampling inverts F by bisection to absolute tolerance 1e-10 in probability.
The grid walker observes a discrete N(0, h) random walk instead; its exit
time is biased upward by O(sqrt(h)) because excursions between grid points
go unseen. That bias is documented and deliberately not corrected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import BudgetError, NumericError, ParameterError

SERIES_SWITCH_T = 0.05
SERIES_TERM_TOL = 1e-12
_PI2_OVER_8 = math.pi * math.pi / 8.0
_UPPER_BRACKET = 40.0  # survival(40) ~ 5e-22, below the resolution of float-uniform draws


def _cdf_small_t(t: np.ndarray) -> np.ndarray:
    # F(t) = 4 * sum_j [Q((4j+1)/sqrt(t)) - Q((4j+3)/sqrt(t))], terms positive
    # and strictly decreasing, so the alternating-series error bound applies
    # to the paired form as well.
    root = 1.0 / np.sqrt(t)
    total = np.zeros_like(t)
    for j in range(64):
        term = ndtr(-(4 * j + 1) * root) - ndtr(-(4 * j + 3) * root)
        total += term
        if float(term.max(initial=0.0)) < SERIES_TERM_TOL / 4.0:
            return 4.0 * total
    raise NumericError("image series for the exit distribution did not converge")


def _cdf_large_t(t: np.ndarray) -> np.ndarray:
    coeff = 4.0 / math.pi
    survival = np.zeros_like(t)
    sign = 1.0
    for j in range(400):
        m = 2 * j + 1
        term = (coeff / m) * np.exp(-(m * m) * _PI2_OVER_8 * t)
        survival += sign * term
        sign = -sign
        m_next = m + 2
        next_max = (coeff / m_next) * math.exp(-(m_next * m_next) * _PI2_OVER_8 * float(t.min()))
        if next_max < SERIES_TERM_TOL:
            return np.clip(1.0 - survival, 0.0, 1.0)
    raise NumericError("spectral series for the exit distribution did not converge")


def unit_exit_cdf(t):
    """P(tau_1 <= t) for the exit time tau_1 of standard BM from [-1, 1]."""
    arr = np.asarray(t, dtype=float)
    out = np.zeros(arr.shape)
    flat = arr.ravel()
    res = out.ravel()
    small = (flat > 0.0) & (flat < SERIES_SWITCH_T)
    large = flat >= SERIES_SWITCH_T
    if small.any():
        res[small] = _cdf_small_t(flat[small])
    if large.any():
        res[large] = _cdf_large_t(flat[large])
    return float(out) if np.isscalar(t) or arr.ndim == 0 else out


def invert_unit_cdf(u: np.ndarray, *, prob_tol: float = 1e-10, max_iter: int = 128) -> np.ndarray:
    """Solve unit_exit_cdf(t) = u elementwise by bisection.

    Convergence criterion is the bracket width measured in probability, so
    every returned draw carries distribution-function error at most prob_tol.
    """
    u = np.asarray(u, dtype=float)
    lo = np.zeros_like(u)
    hi = np.full_like(u, _UPPER_BRACKET)
    flo = np.zeros_like(u)
    fhi = np.ones_like(u)
    active = np.arange(u.size)
    for _ in range(max_iter):
        if active.size == 0:
            break
        mid = 0.5 * (lo[active] + hi[active])
        fm = unit_exit_cdf(mid)
        below = fm < u[active]
        lo[active] = np.where(below, mid, lo[active])
        flo[active] = np.where(below, fm, flo[active])
        hi[active] = np.where(below, hi[active], mid)
        fhi[active] = np.where(below, fhi[active], fm)
        active = active[(fhi[active] - flo[active]) > prob_tol]
    if active.size:
        raise NumericError("bisection did not reach the probability tolerance")
    return 0.5 * (lo + hi)


def sample_first_exit(
    a: float,
    rng: np.random.Generator,
    size: int | None = None,
    *,
    prob_tol: float = 1e-10,
):
    """Exact draws (tau, sign) of the first exit of BM from [-a, a].

    tau = a**2 * tau_1 by Brownian scaling; the exit side is an independent
    fair sign because the interval is symmetric.
    """
    if not a > 0:
        raise ParameterError(f"interval half-width must be positive, got {a!r}")
    m = 1 if size is None else int(size)
    tau = (a * a) * invert_unit_cdf(rng.random(m), prob_tol=prob_tol)
    sign = rng.integers(0, 2, m) * 2 - 1
    if size is None:
        return float(tau[0]), int(sign[0])
    return tau, sign


@dataclass(eq=False)
class GridExit:
    """Result of one discrete-walk exit: time, side, and the walk itself.

    values[0] is 0 and values[i] is the walk at time i * h; the final entry
    is the first one at or beyond +/-a, overshoot included.
    """

    exit_time: float
    sign: int
    values: np.ndarray


def grid_exit(
    a: float,
    h: float,
    rng: np.random.Generator,
    *,
    max_steps: int = 10**9,
) -> GridExit:
    """Walk N(0, h) increments until |walk| >= a.

    Requires h <= a**2 / 100 so the walk resolves the interval. Raises
    BudgetError when max_steps increments pass without an exit.
    """
    if not a > 0:
        raise ParameterError(f"interval half-width must be positive, got {a!r}")
    if not 0 < h <= a * a / 100.0:
        raise ParameterError(f"grid step h={h!r} must lie in (0, a^2/100]")
    sqrt_h = math.sqrt(h)
    block = min(max_steps, int(1.25 * a * a / h) + 64)
    blocks: list[np.ndarray] = []
    last = 0.0
    used = 0
    while used < max_steps:
        m = min(block, max_steps - used)
        w = last + np.cumsum(rng.standard_normal(m) * sqrt_h)
        hit = np.abs(w) >= a
        j = int(np.argmax(hit))
        if hit[j]:
            blocks.append(w[: j + 1])
            used += j + 1
            values = np.concatenate([np.zeros(1), *blocks])
            return GridExit(exit_time=used * h, sign=1 if w[j] > 0 else -1, values=values)
        blocks.append(w)
        used += m
        last = float(w[-1])
        block = max(1024, block // 2)
    raise BudgetError(f"no exit within {max_steps} steps (a={a!r}, h={h!r})")


def first_crossing(values: np.ndarray, start: int, level: float, *, chunk: int = 4096) -> int:
    """First index j > start with |values[j] - values[start]| >= level, else -1.

    Scans in chunks so the cost tracks the actual crossing position instead
    of the array length.
    """
    base = values[start]
    i = start + 1
    n = len(values)
    while i < n:
        j = min(i + chunk, n)
        hits = np.abs(values[i:j] - base) >= level
        k = int(np.argmax(hits))
        if hits[k]:
            return i + k
        i = j
    return -1
