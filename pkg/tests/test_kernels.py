import math
import os
import subprocess
import sys

import numpy as np
import pytest

from dpleak import _pykernels
from dpleak.stats import _lbeta_half

from conftest import _ckernels

needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


def test_tail_values(backend):
    assert backend.t_two_sided_tail(0.0, 5.0, _lbeta_half(5)) == 1.0
    # Cauchy: P(|T| > 1) = 1/2
    assert backend.t_two_sided_tail(1.0, 1.0, _lbeta_half(1)) == pytest.approx(0.5, abs=1e-14)
    assert backend.t_two_sided_tail(-1.0, 1.0, _lbeta_half(1)) == pytest.approx(0.5, abs=1e-14)


def test_betainc_endpoints(backend):
    lb = math.lgamma(2.0) + math.lgamma(3.0) - math.lgamma(5.0)
    assert backend.betainc(2.0, 3.0, 0.0, 1.0, lb) == 0.0
    assert backend.betainc(2.0, 3.0, 1.0, 0.0, lb) == 1.0
    # I_x(2, 3) = 6x^2 - 8x^3 + 3x^4
    x = 0.3
    assert backend.betainc(2.0, 3.0, x, 1 - x, lb) == pytest.approx(6 * x**2 - 8 * x**3 + 3 * x**4, abs=1e-14)


def test_laplace_kernel(backend):
    assert backend.laplace_from_uniform(0.25, 2.0) == pytest.approx(2.0 * math.log(2.0), rel=1e-15)
    assert backend.laplace_from_uniform(-0.25, 2.0) == pytest.approx(-2.0 * math.log(2.0), rel=1e-15)


def test_harvest_kernel_matches_t_test(backend):
    from dpleak.stats import one_sample_t_test

    rng = np.random.default_rng(8)
    m, n = 7, 50
    u = rng.random((n, m)) - 0.5
    eff = np.where(np.arange(n) % 2 == 0, 2.0, 1.0)
    out = np.empty(n)
    backend.singleton_harvest_pvalues(u, eff, m - 1.0, float(m), 1.5, float(m), _lbeta_half(m - 1), out)
    for r in range(n):
        samples = [(eff[r] + backend.laplace_from_uniform(v, 1.5)) + (m - 1.0) for v in u[r]]
        assert out[r] == one_sample_t_test(samples, float(m)).p_value


def test_harvest_kernel_flags_degenerate(backend):
    u = np.zeros((1, 4))
    out = np.empty(1)
    backend.singleton_harvest_pvalues(u, np.array([1.0]), 3.0, 4.0, 1.0, 4.0, _lbeta_half(3), out)
    assert math.isnan(out[0])


@needs_c
def test_backends_bit_identical():
    rng = np.random.default_rng(1)
    for _ in range(2000):
        t = float(rng.standard_cauchy() * 3)
        nu = int(rng.integers(1, 80))
        lb = _lbeta_half(nu)
        assert _ckernels.t_two_sided_tail(t, float(nu), lb) == _pykernels.t_two_sided_tail(t, float(nu), lb)
    u = rng.random((300, 9)) - 0.5
    eff = np.where(np.arange(300) % 2 == 0, 2.0, 1.0)
    a, b = np.empty(300), np.empty(300)
    args = (8.0, 9.0, 0.9, 9.0, _lbeta_half(8))
    _ckernels.singleton_harvest_pvalues(u, eff, *args, a)
    _pykernels.singleton_harvest_pvalues(u, eff, *args, b)
    assert np.array_equal(a, b)


def test_pure_python_fallback_selected_by_env():
    code = "from dpleak import BACKEND; from dpleak.analysis import empirical_success_rate as e; print(BACKEND, e(10, 10.0, 200, 1))"
    env = dict(os.environ, DPLEAK_PURE_PYTHON="1")
    forced = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert forced.stdout.startswith("python ")
    env["DPLEAK_PURE_PYTHON"] = "0"
    default = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    expected = "cython" if _ckernels is not None else "python"
    assert default.stdout.startswith(expected + " ")
    # same Monte Carlo result either way
    assert forced.stdout.split(" ", 1)[1] == default.stdout.split(" ", 1)[1]
