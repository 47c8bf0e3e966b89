import math

import numpy as np
import pytest
from scipy.integrate import quad
from hypothesis import given, settings
from hypothesis import strategies as st

from opdet.kernels import (KernelSpec, decay_radius, eval_correction_kernel, eval_half_limit,
                           eval_limit, eval_window_kernel)

# mpmath, 30 digits
SECH_1 = 0.648054273663885399574977353226
SECH_HALF = 0.886818883970073908658897797783
E_M4 = 0.0183156388887341802937180212732
E_M2 = 0.135335283236612691893999494972
K11_AT_M1_0 = 0.0215280975250793333774446592841


def test_limit_kernel(toda):
    assert eval_limit(toda(1.0), 0.0) == 1.0
    assert eval_limit(toda(0.0), 3.7) == 0.0
    assert abs(eval_limit(toda(1.0), 2.0) - SECH_1) < 1e-15
    d = np.linspace(-9, 9, 37)
    np.testing.assert_array_equal(eval_limit(toda(0.3), d), eval_limit(toda(0.3), -d))


def test_window_kernel_examples(toda, window):
    assert abs(eval_window_kernel(toda(1.0), 0.0, 0.0, 0.0) - E_M4) < 1e-17
    assert eval_window_kernel(toda(0.0), 2.0, 0.3, -1.1) == 0.0
    assert eval_window_kernel(window(1.0), 2.0, 3.0, 0.0) == 0.0
    assert eval_window_kernel(window(1.0), 2.0, 1.0, -1.0) == eval_limit(window(1.0), 2.0)
    with pytest.raises(ValueError):
        eval_window_kernel(toda(), -1.0, 0, 0)


def test_half_limit_examples(toda, window):
    assert abs(eval_half_limit(toda(1.0), "plus", 0.0, 0.0) - E_M2) < 1e-16
    assert eval_half_limit(toda(1.0), "minus", 0.0, 0.0) == eval_half_limit(toda(1.0), "plus", 0.0, 0.0)
    assert abs(eval_half_limit(window(1.0), "plus", -1.0, -2.0) - SECH_HALF) < 1e-15
    assert eval_half_limit(window(1.0), "plus", 1.0, -2.0) == 0.0
    assert eval_half_limit(window(1.0), "minus", 1.0, 2.0) == eval_limit(window(1.0), -1.0)


def test_correction_examples(toda, window):
    x = np.linspace(-4, 4, 9)
    assert np.all(eval_correction_kernel(window(1.0), "K11", x[:, None], x[None, :]) == 0)
    assert np.all(eval_correction_kernel(window(1.0), "K22", x[:, None], x[None, :]) == 0)
    assert abs(eval_correction_kernel(toda(1.0), "K11", 0.0, 0.0) - (E_M2 - 1)) < 1e-15
    assert abs(eval_correction_kernel(toda(1.0), "K11", 1e-300, 1e-300) - (E_M2 - 1)) < 1e-15
    assert abs(eval_correction_kernel(toda(1.0), "K11", -1.0, 0.0) - K11_AT_M1_0) < 1e-16


def test_correction_right_tail_decays_like_exp(toda):
    for x in (10.0, 15.0, 20.0):
        v = eval_correction_kernel(toda(1.0), "K11", x, x)
        # 1 - exp(-2 e^{-x}) cancels; allow its rounding error
        assert abs(v) <= 2 * math.exp(-x) * (1 + 1e-6)
        assert abs(v) > 1.9 * math.exp(-x)


def test_decay_radius_examples(toda, window):
    assert decay_radius(window(1.0), "K_alpha", 3.0, 1e-6) == (-3.0, 3.0)
    lo, hi = decay_radius(toda(1.0), "K_alpha", 5.0, 1e-12)
    assert abs(hi - 8.31893909503596) < 1e-12 and lo == -hi
    _, hi = decay_radius(toda(1.0), "K11", tol=1e-10)
    assert abs(hi - 23.7189981105004) < 1e-12
    lo, hi = decay_radius(toda(1.0), "K22", tol=1e-10)
    assert abs(lo + 23.7189981105004) < 1e-12 and hi > 0
    for tol in (0.0, 1.0, -1e-3):
        with pytest.raises(ValueError):
            decay_radius(toda(1.0), "K11", tol=tol)


def test_decay_radius_bounds_tail(toda):
    spec = toda(1.0)
    for alpha in (2.0, 6.0):
        _, L = decay_radius(spec, "K_alpha", alpha, 1e-12)
        assert eval_window_kernel(spec, alpha, L, L) < 1e-12
    _, L = decay_radius(spec, "K11", tol=1e-10)
    tail, _ = quad(lambda x: abs(eval_correction_kernel(spec, "K11", x, x)), L, np.inf,
                   epsabs=1e-16, epsrel=1e-10)
    assert tail < 1e-10


coords = st.floats(-12, 12, allow_nan=False)
lams = st.floats(-2, 2, allow_nan=False)


@given(lams, st.floats(0, 10), coords, coords)
@settings(max_examples=200, deadline=None)
def test_symmetry_is_bit_exact(lam, alpha, x, y):
    for fam in ("toda", "window"):
        s = KernelSpec(fam, lam)
        assert eval_window_kernel(s, alpha, x, y) == eval_window_kernel(s, alpha, y, x)
        for side in ("plus", "minus"):
            assert eval_half_limit(s, side, x, y) == eval_half_limit(s, side, y, x)
        for which in ("K11", "K22"):
            assert eval_correction_kernel(s, which, x, y) == eval_correction_kernel(s, which, y, x)


@given(lams, st.floats(0, 10), coords.filter(lambda v: v != 0), coords.filter(lambda v: v != 0))
@settings(max_examples=200, deadline=None)
def test_toda_reflection(lam, alpha, x, y):
    s = KernelSpec("toda", lam)
    assert eval_half_limit(s, "plus", x, y) == eval_half_limit(s, "minus", -x, -y)
    assert eval_correction_kernel(s, "K22", x, y) == eval_correction_kernel(s, "K11", -x, -y)
    assert eval_window_kernel(s, alpha, x, y) == eval_window_kernel(s, alpha, -x, -y)


@given(st.floats(1e-3, 2), st.floats(0, 10), coords, coords)
@settings(max_examples=200, deadline=None)
def test_range_and_positivity(lam, alpha, x, y):
    s = KernelSpec("toda", lam)
    v = eval_window_kernel(s, alpha, x, y)
    assert 0 <= v <= lam
    for side in ("plus", "minus"):
        assert 0 <= eval_half_limit(s, side, x, y) <= lam


def test_strict_positivity_in_bulk(toda):
    x = np.linspace(-3, 3, 13)
    s = toda(0.2)
    assert np.all(eval_window_kernel(s, 5.0, x[:, None], x[None, :]) > 0)
    assert np.all(eval_half_limit(s, "minus", x[:, None], x[None, :]) > 0)


def test_pointwise_limit_monotone_in_alpha(toda):
    s = toda(1.0)
    x = np.linspace(-4, 4, 9)
    X, Y = np.meshgrid(x, x)
    target = eval_limit(s, X - Y)
    gaps = [np.abs(eval_window_kernel(s, a, X, Y) - target) for a in (2.0, 4.0, 6.0, 8.0, 10.0)]
    for prev, cur in zip(gaps, gaps[1:]):
        assert np.all(cur < prev)
    assert np.max(gaps[-1]) < 1e-2


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("other", 1.0)
    with pytest.raises(ValueError):
        KernelSpec("toda", float("inf"))
