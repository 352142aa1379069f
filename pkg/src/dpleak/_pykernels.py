"""Pure-Python kernels.

Reference implementation of the hot loops. ``_ckernels.pyx`` mirrors every
function here operation for operation, so both backends return bit-identical
floats on the same platform libm.
"""
import math

CF_MAX_ITER = 200
CF_EPS = 1e-14
_TINY = 1e-300


def _betacf(a, b, x):
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if math.fabs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for i in range(1, CF_MAX_ITER + 1):
        m = float(i)
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if math.fabs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if math.fabs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if math.fabs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if math.fabs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if math.fabs(delta - 1.0) < CF_EPS:
            return h
    return math.nan


def betainc(a, b, x, y, lbeta):
    """Regularized incomplete beta I_x(a, b).

    ``y`` must equal ``1 - x``; callers pass it separately so that it can be
    formed without cancellation. ``lbeta`` is ``ln B(a, b)``. Returns NaN if
    the continued fraction does not converge.
    """
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    front = math.exp(a * math.log(x) + b * math.log(y) - lbeta)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


def t_two_sided_tail(t, nu, lbeta):
    """P(|T| > |t|) for Student t with ``nu`` degrees of freedom.

    ``lbeta`` is ``ln B(nu/2, 1/2)``.
    """
    t2 = t * t
    return betainc(0.5 * nu, 0.5, nu / (nu + t2), t2 / (nu + t2), lbeta)


def laplace_from_uniform(u, scale):
    """Inverse-CDF Laplace draw for ``u`` in (-1/2, 1/2)."""
    if u > 0.0:
        return -scale * math.log1p(-2.0 * u)
    if u < 0.0:
        return scale * math.log1p(2.0 * u)
    return 0.0


def singleton_harvest_pvalues(u, eff, local, mu0, scale, divisor, lbeta, out):
    """Two-sided t-test p-values for a batch of simulated harvests.

    Row ``r`` of ``u`` holds the ``m`` noise uniforms of one trial. Every
    harvested answer is ``(eff[r] + noise) + local``, where ``eff[r]`` is the
    true count of one issued condition and ``local`` the attacker-side
    remainder. Degenerate samples (zero spread) get NaN.
    """
    rows = len(u)
    for r in range(rows):
        row = u[r]
        m = len(row)
        base = eff[r]
        buf = [0.0] * m
        s = 0.0
        for i in range(m):
            a = (base + laplace_from_uniform(row[i], scale)) + local
            buf[i] = a
            s += a
        xbar = s / m
        ss = 0.0
        for i in range(m):
            dev = buf[i] - xbar
            ss += dev * dev
        sd = math.sqrt(ss / divisor)
        if sd == 0.0:
            out[r] = math.nan
            continue
        t = (xbar - mu0) / (sd / math.sqrt(m))
        out[r] = t_two_sided_tail(t, float(m - 1), lbeta)
