# Compiled mirror of _pykernels.py. Keep the two in lockstep: same operation
# order, same constants, so both backends produce identical floats.
from libc.math cimport exp, fabs, log, log1p, sqrt, NAN

cdef int CF_MAX_ITER = 200
cdef double CF_EPS = 1e-14
cdef double _TINY = 1e-300


cdef double _betacf(double a, double b, double x) noexcept nogil:
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, m, m2, aa, delta
    cdef int i
    if fabs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for i in range(1, CF_MAX_ITER + 1):
        m = <double>i
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if fabs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if fabs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < CF_EPS:
            return h
    return NAN


cdef double _betainc(double a, double b, double x, double y, double lbeta) noexcept nogil:
    cdef double front
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    front = exp(a * log(x) + b * log(y) - lbeta)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


cdef double _tail2(double t, double nu, double lbeta) noexcept nogil:
    cdef double t2 = t * t
    return _betainc(0.5 * nu, 0.5, nu / (nu + t2), t2 / (nu + t2), lbeta)


cdef double _laplace(double u, double scale) noexcept nogil:
    if u > 0.0:
        return -scale * log1p(-2.0 * u)
    if u < 0.0:
        return scale * log1p(2.0 * u)
    return 0.0


def betainc(double a, double b, double x, double y, double lbeta):
    """Regularized incomplete beta I_x(a, b); see _pykernels.betainc."""
    return _betainc(a, b, x, y, lbeta)


def t_two_sided_tail(double t, double nu, double lbeta):
    """P(|T| > |t|) for Student t with ``nu`` degrees of freedom."""
    return _tail2(t, nu, lbeta)


def laplace_from_uniform(double u, double scale):
    """Inverse-CDF Laplace draw for ``u`` in (-1/2, 1/2)."""
    return _laplace(u, scale)


def singleton_harvest_pvalues(const double[:, :] u, const double[:] eff,
                              double local, double mu0, double scale,
                              double divisor, double lbeta, double[:] out):
    """Batch t-test p-values for simulated harvests; see _pykernels."""
    cdef Py_ssize_t rows = u.shape[0]
    cdef Py_ssize_t m = u.shape[1]
    cdef Py_ssize_t r, i
    cdef double base, a, s, xbar, ss, dev, sd, t
    cdef double[::1] buf
    if m == 0:
        return
    import numpy
    buf = numpy.empty(m)
    with nogil:
        for r in range(rows):
            base = eff[r]
            s = 0.0
            for i in range(m):
                a = (base + _laplace(u[r, i], scale)) + local
                buf[i] = a
                s += a
            xbar = s / <double>m
            ss = 0.0
            for i in range(m):
                dev = buf[i] - xbar
                ss += dev * dev
            sd = sqrt(ss / divisor)
            if sd == 0.0:
                out[r] = NAN
                continue
            t = (xbar - mu0) / (sd / sqrt(<double>m))
            out[r] = _tail2(t, <double>(m - 1), lbeta)
