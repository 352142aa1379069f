"""Statistical numerics: Laplace sampling, Student t, the one-sample t-test,
and adaptive Simpson quadrature."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from dpleak._backend import kernels

SDivisor = Literal["m", "m-1"]


class DegenerateSample(ValueError):
    """Sample standard deviation is zero, so the t statistic is undefined."""


class NonConvergence(ArithmeticError):
    """An iterative numerical routine did not reach its tolerance."""


@dataclass(frozen=True)
class TTestResult:
    t_stat: float
    df: int
    p_value: float
    reject_null: bool


# Laplace sampling ----------------------------------------------------------

def draw_uniform(rng: np.random.Generator) -> float:
    """One uniform on the open interval (-1/2, 1/2).

    A raw draw of exactly 0 would map to -1/2 and an infinite Laplace value,
    so it is discarded and redrawn.
    """
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u - 0.5


def draw_uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` successive :func:`draw_uniform` values, drawn as one block."""
    raw = rng.random(n)
    if np.any(raw == 0.0):
        kept = [v for v in raw if v != 0.0]
        while len(kept) < n:
            v = rng.random()
            if v != 0.0:
                kept.append(v)
        raw = np.array(kept)
    return raw - 0.5


def sample_laplace(rng: np.random.Generator, scale: float) -> float:
    """Draw from Laplace(0, scale) by inverting the CDF."""
    if not scale > 0:
        raise ValueError(f"Laplace scale must be positive, got {scale}")
    return kernels.laplace_from_uniform(draw_uniform(rng), scale)


def laplace_from_uniform(u: float, scale: float) -> float:
    """``-scale * sgn(u) * ln(1 - 2|u|)`` for ``u`` in (-1/2, 1/2)."""
    if not scale > 0:
        raise ValueError(f"Laplace scale must be positive, got {scale}")
    return kernels.laplace_from_uniform(u, scale)


# Student t ---------------------------------------------------------------

def _check_df(nu: int) -> None:
    if isinstance(nu, bool) or int(nu) != nu or nu < 1:
        raise ValueError(f"degrees of freedom must be an integer >= 1, got {nu}")


@functools.lru_cache(maxsize=4096)
def _lbeta_half(nu: int) -> float:
    a = 0.5 * nu
    return math.lgamma(a) + math.lgamma(0.5) - math.lgamma(a + 0.5)


def t_pdf(t: float, nu: int) -> float:
    """Student t density with ``nu`` degrees of freedom."""
    _check_df(nu)
    return math.exp(
        math.lgamma(0.5 * (nu + 1))
        - math.lgamma(0.5 * nu)
        - 0.5 * math.log(nu * math.pi)
        - 0.5 * (nu + 1) * math.log1p(t * t / nu)
    )


def t_two_sided_p(t: float, nu: int) -> float:
    """``P(|T| > |t|)``, equal to ``2 * (1 - t_cdf(|t|, nu))`` without cancellation."""
    _check_df(nu)
    p = kernels.t_two_sided_tail(float(t), float(nu), _lbeta_half(int(nu)))
    if math.isnan(p):
        raise NonConvergence(f"incomplete beta did not converge (t={t}, nu={nu})")
    return p


def t_cdf(t: float, nu: int) -> float:
    """Student t CDF via the regularized incomplete beta function."""
    if math.isinf(t):
        _check_df(nu)
        return 1.0 if t > 0 else 0.0
    half_tail = 0.5 * t_two_sided_p(t, nu)
    return 1.0 - half_tail if t > 0 else half_tail


@functools.lru_cache(maxsize=4096)
def t_quantile(p: float, nu: int) -> float:
    """Inverse of :func:`t_cdf`: bracketing bisection, then Newton polishing."""
    _check_df(nu)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -t_quantile(1.0 - p, nu)

    lo, hi = 0.0, 1.0
    while t_cdf(hi, nu) < p:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, nu) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-6 * max(1.0, hi):
            break
    x = 0.5 * (lo + hi)
    for _ in range(50):
        err = t_cdf(x, nu) - p
        if abs(err) < 1e-13:
            break
        step = err / t_pdf(x, nu)
        nxt = x - step
        if not lo <= nxt <= hi:
            break  # Newton left the bracket; the bisection estimate stands
        x = nxt
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    if abs(t_cdf(x, nu) - p) > 1e-9:
        raise NonConvergence(f"t_quantile({p}, {nu}) did not converge")
    return x


# One-sample t-test -------------------------------------------------------------

def one_sample_t_test(
    samples: Sequence[float],
    mu0: float,
    alpha: float = 0.05,
    s_divisor: SDivisor = "m",
) -> TTestResult:
    """Two-sided one-sample t-test of ``mean == mu0``.

    The sample standard deviation divides by ``m`` by default (the attack's
    convention); pass ``s_divisor="m-1"`` for the textbook estimator. The
    statistic is referred to a t distribution with ``m - 1`` degrees of
    freedom either way.
    """
    m = len(samples)
    if m < 2:
        raise ValueError(f"need at least 2 samples, got {m}")
    if s_divisor not in ("m", "m-1"):
        raise ValueError(f"s_divisor must be 'm' or 'm-1', got {s_divisor!r}")
    divisor = float(m) if s_divisor == "m" else float(m - 1)

    # plain left-to-right sums, matching the batch kernel exactly
    s = 0.0
    for a in samples:
        s += a
    xbar = s / m
    ss = 0.0
    for a in samples:
        dev = a - xbar
        ss += dev * dev
    sd = math.sqrt(ss / divisor)
    if sd == 0.0:
        raise DegenerateSample("all samples are identical")
    t = (xbar - mu0) / (sd / math.sqrt(m))
    p = t_two_sided_p(t, m - 1)
    return TTestResult(t_stat=t, df=m - 1, p_value=p, reject_null=p < alpha)


# Quadrature --------------------------------------------------------------------

MAX_DEPTH = 60
MIN_DEPTH = 4  # guards against a lucky coarse estimate on wide intervals


def integrate(f: Callable[[float], float], a: float, b: float, tol: float = 1e-9) -> float:
    """Adaptive Simpson quadrature of ``f`` over ``[a, b]``.

    Intervals are split until Richardson's error estimate meets the share of
    ``tol`` allotted to them. Raises :class:`NonConvergence` if an interval
    still fails at depth 60.
    """
    if not a <= b:
        raise ValueError(f"need a <= b, got [{a}, {b}]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if a == b:
        return 0.0

    fa, fb = f(a), f(b)
    c = 0.5 * (a + b)
    fc = f(c)
    whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb)
    total = 0.0
    stack = [(a, b, fa, fc, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        diff = left + right - est
        if depth >= MIN_DEPTH and abs(diff) <= 15.0 * eps:
            total += left + right + diff / 15.0
        elif depth >= MAX_DEPTH:
            raise NonConvergence(f"adaptive Simpson exceeded depth {MAX_DEPTH} on [{lo}, {hi}]")
        else:
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return total
