from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from fbosc import errors as E
from fbosc.config import r_max
from fbosc.transfer import (abs_sq_difference, commutator_residual, decompose_phase_sensitive,
                            recombine_phase_sensitive, transfer_insensitive,
                            transfer_near_resonance, transfer_phase_sensitive)

# (eta, Omega tau, r_s) -> (h0, hg, h0p, hgq, hgp), 40-digit mpmath evaluation
# of the z = exp(i Omega tau) rational forms
REFERENCE = [
    ((0.3, 1.234, 0.2),
     (1.1867322079278599 + 0.453306847640037384j, 0.639009650422693821 - 0.453306847640037384j,
      1.0007826997800021 + 0.42727093868838183j, 0.56768302004385425 - 0.40270847256318171j,
      0.49126196707397060 - 0.25443921633321105j)),
    ((0.3, math.pi + 1e-3, 0.2),
     (1.18673220792786 - 1278.0191943437774632j, 0.639009650422694 + 1278.0191943437774632j,
      -2.0507835500522639 - 0.0078819157312535402j, 0.56768302004385425 + 1135.3659454738702513j,
      2.3084651861360352 + 0.0046936692395248334j)),
    ((0.9, math.pi - 1e-5, 0.05),
     (1.0013879257199868 + 10540.925533806754j, 0.052704627669472977 - 10540.925533806754j,
      -0.053582881222814846 + 0.00010532145714183784j, 0.012186255613870415 - 2437.2511227537726j,
      0.23174192487580161 - 0.000022034791461559489j)),
]


def _close(a, b, rtol=1e-12):
    return abs(a - b) <= rtol * abs(b)


@pytest.mark.parametrize("args,ref", REFERENCE)
def test_transfer_matches_reference(args, ref):
    eta, theta, r = args
    h0, hg, h0p, hgq, hgp = ref
    # the double nearest theta differs from theta by ~1e-16, amplified near the pole
    rtol = max(1e-12, 1e-15 / abs(math.cos(theta / 2)))
    ti = transfer_insensitive(eta, 1.0, theta)
    assert _close(ti.h0, h0, rtol) and _close(ti.hg, hg, rtol)
    tp = transfer_phase_sensitive(eta, 1.0, r, theta)
    assert _close(tp.h0q, h0, rtol) and _close(tp.hgq, hgq, rtol)
    assert _close(tp.h0p, h0p, rtol) and _close(tp.hgp, hgp, rtol)


def test_example_values_quarter_pi():
    tf = transfer_insensitive(0.25, 1.0, math.pi / 2)
    assert tf.h0 == pytest.approx(1.25 + 0.75j, abs=1e-14)
    assert tf.hg == pytest.approx(0.75 - 0.75j, abs=1e-14)


def test_offset_mode_equals_shifted_absolute():
    a = transfer_insensitive(0.4, 2.0, 0.3, offset=True)
    b = transfer_insensitive(0.4, 2.0, (math.pi + 0.6) / 2.0)
    assert _close(a.h0, b.h0) and _close(a.hg, b.hg)


@given(eta=st.floats(1e-3, 1.0), theta=st.floats(-20, 20))
def test_naive_rational_form(eta, theta):
    z = cmath.exp(1j * theta)
    assume(abs(1 + z) > 1e-3)
    tf = transfer_insensitive(eta, 1.0, theta)
    se = math.sqrt(eta)
    assert abs(tf.h0 - (se + z / se) / (1 + z)) < 1e-9 * abs(tf.h0)
    assert abs(tf.hg - (1 / se - se) / (1 + z)) < 1e-9 * max(abs(tf.hg), 1e-12)


@given(eta=st.floats(1e-3, 1.0), theta=st.floats(-20, 20), k=st.integers(-5, 5))
def test_periodic_in_free_spectral_range(eta, theta, k):
    assume(abs(math.cos(theta / 2)) > 1e-3)
    a = transfer_insensitive(eta, 1.0, theta)
    b = transfer_insensitive(eta, 1.0, theta + 2 * math.pi * k)
    assert abs(a.h0 - b.h0) <= 1e-9 * abs(a.h0)


@given(eta=st.floats(1e-3, 1.0), theta=st.floats(-20, 20))
def test_conjugate_symmetry(eta, theta):
    assume(abs(math.cos(theta / 2)) > 1e-3)
    a = transfer_insensitive(eta, 1.0, theta)
    b = transfer_insensitive(eta, 1.0, -theta)
    assert abs(a.h0 - b.h0.conjugate()) <= 1e-12 * abs(a.h0)
    assert abs(a.hg - b.hg.conjugate()) <= 1e-12 * max(abs(a.hg), 1.0)


# below eta ~ 1e-3 the rounding of |h0|^2 ~ 1/(4 eta) alone exceeds 1e-12
@settings(max_examples=500)
@given(eta=st.floats(1e-3, 1.0), theta=st.floats(-100, 100))
def test_commutator_identity(eta, theta):
    assume(abs(2 * math.cos(theta / 2)) >= 1e-9)
    assert abs(commutator_residual(eta, 1.0, theta)) < 1e-12


def test_commutator_vectorized():
    rng = np.random.default_rng(1)
    theta = rng.uniform(0, 2 * np.pi, 10_000)
    res = commutator_residual(0.2, 1.0, theta)
    assert res.shape == theta.shape and np.max(np.abs(res)) < 1e-12


def test_abs_sq_difference_simple():
    assert abs_sq_difference(3 + 4j, 1 + 1j) == pytest.approx(23.0)


def test_pole_raises():
    with pytest.raises(E.PoleFrequency):
        transfer_insensitive(0.5, 1.0, math.pi)
    with pytest.raises(E.PoleFrequency):
        transfer_insensitive(0.5, 1.0, 0.0, offset=True)
    with pytest.raises(E.PoleFrequency):
        transfer_insensitive(0.5, 1.0, np.array([0.0, math.pi]))


def test_eta_checked():
    with pytest.raises(E.EtaOutOfRange):
        transfer_insensitive(0.0, 1.0, 0.1)
    with pytest.raises(E.EtaOutOfRange):
        transfer_insensitive(1.2, 1.0, 0.1)


def test_lossless_is_all_pass():
    tf = transfer_insensitive(1.0, 1.0, np.linspace(0, 3, 50))
    assert np.allclose(np.abs(tf.h0), 1.0, atol=1e-15)
    assert np.all(tf.hg == 0)


def test_phase_sensitive_rs_zero_is_insensitive():
    theta = np.linspace(0.01, 3.1, 200)
    a = transfer_insensitive(0.37, 1.0, theta)
    b = transfer_phase_sensitive(0.37, 1.0, 0.0, theta)
    for x, y in ((a.h0, b.h0q), (a.h0, b.h0p), (a.hg, b.hgq), (a.hg, b.hgp)):
        assert np.max(np.abs(x - y)) < 1e-12


@given(eta=st.floats(1e-3, 0.999), theta=st.floats(0.01, 3.1))
def test_phase_sensitive_noise_free_at_rmax(eta, theta):
    tf = transfer_phase_sensitive(eta, 1.0, r_max(eta), theta)
    assert abs(tf.hgq) < 1e-12 and abs(tf.hgp) < 1e-12


def test_phase_sensitive_range_checked():
    with pytest.raises(E.SqueezeExceedsRmax):
        transfer_phase_sensitive(0.25, 1.0, 0.8, 0.3)
    with pytest.raises(E.NegativeSqueeze):
        transfer_phase_sensitive(0.25, 1.0, -0.1, 0.3)


def test_q_pole_probe():
    with pytest.raises(E.PoleFrequency):
        transfer_phase_sensitive(0.25, 1.0, math.log(2), math.pi)
    tf = transfer_phase_sensitive(0.25, 1.0, math.log(2), math.pi, allow_q_pole=True)
    assert math.isinf(abs(tf.h0q)) and tf.hgq == 0
    # pure squeezer at the carrier: p transfer is (z/sqrt(eta) + 4 sqrt(eta)) / (4 + z), z = -1
    assert tf.h0p == pytest.approx((-2 + 2) / 3, abs=1e-15)


def test_near_resonance_matches_exact():
    eta, r = 0.3, 0.2
    x = np.array([1e-4, 1e-3])
    exact = transfer_phase_sensitive(eta, 1.0, r, x, offset=True)
    approx = transfer_near_resonance(eta, 1.0, r, x)
    for a, b in ((exact.h0q, approx.h0q), (exact.hgq, approx.hgq),
                 (exact.h0p, approx.h0p), (exact.hgp, approx.hgp)):
        assert np.all(np.abs(a - b) <= 5 * x * np.abs(b) + 1e-12)


def test_near_resonance_warns_outside_range():
    with pytest.warns(RuntimeWarning):
        transfer_near_resonance(0.3, 1.0, 0.1, 0.5)


def test_decomposition_fixture():
    gcal, r = decompose_phase_sensitive(5.0, 3.0)
    assert gcal == pytest.approx(4.0, abs=1e-15)
    assert r == pytest.approx(math.log(2), abs=1e-15)


@given(G=st.floats(1e-3, 1e3), frac=st.floats(0.0, 0.999999))
def test_decomposition_round_trip(G, frac):
    g = frac * G
    G2, g2 = recombine_phase_sensitive(*decompose_phase_sensitive(G, g))
    assert abs(G2 - G) <= 1e-12 * G and abs(g2 - g) <= 1e-12 * G


@pytest.mark.parametrize("G,g", [(3.0, 3.0), (2.0, 3.0), (2.0, -0.1)])
def test_decomposition_rejects_non_amplifiers(G, g):
    with pytest.raises(E.NonAmplifier):
        decompose_phase_sensitive(G, g)
