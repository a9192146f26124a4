import numpy as np
import pytest

from casimir_stack.casimir import three_layer_log
from casimir_stack.errors import DomainError
from casimir_stack.greens import (dyadic_yy, dyadic_zz_regular, g_homogeneous, g_mixed_derivative,
                                  g_scalar, gamma_entries)
from casimir_stack.response import VACUUM, eval_imag_axis
from casimir_stack.stack import Layer, Stack, TransverseMode, d_factor

from media import GAIN_09, LOSS_09, MIXED
from oracles import bulk_dyadic_numeric, bvp_green

VAC = Layer(VACUUM, VACUUM, 1.0)


def test_homogeneous_examples():
    mode = TransverseMode("TE", 0.0, 1.0)
    assert g_homogeneous(VACUUM, VACUUM, mode, 0.3, 0.3) == 0.5
    assert g_homogeneous(VACUUM, VACUUM, mode, 0.0, 1.0) == pytest.approx(np.exp(-1) / 2, rel=1e-15)
    assert g_homogeneous(VACUUM, VACUUM, mode, 0.0, 1.0) == pytest.approx(0.1839397, abs=1e-7)
    assert g_homogeneous(GAIN_09, GAIN_09, mode, 0.2, 0.2) == pytest.approx(0.5, rel=1e-14)


def test_homogeneous_weights():
    # TE carries mu, TM carries eps
    mode_te = TransverseMode("TE", 0.4, 1.0)
    mode_tm = TransverseMode("TM", 0.4, 1.0)
    a = g_homogeneous(LOSS_09, VACUUM, mode_te, 0.0, 0.5)
    b = g_homogeneous(LOSS_09, VACUUM, mode_tm, 0.0, 0.5)
    assert b / a == pytest.approx(eval_imag_axis(LOSS_09, 1.0), rel=1e-14)


@pytest.mark.parametrize("sigma", ["TE", "TM"])
@pytest.mark.parametrize("medium", [(VACUUM, VACUUM), (GAIN_09, LOSS_09), (MIXED, GAIN_09)])
def test_single_layer_equals_homogeneous(sigma, medium):
    rng = np.random.default_rng(5)
    st_ = Stack([Layer(medium[0], medium[1], np.inf)])
    for _ in range(50):
        mode = TransverseMode(sigma, rng.uniform(0, 3), rng.uniform(0.01, 3))
        z, zp = rng.uniform(-5, 5, 2)
        a = g_scalar(st_, mode, z, zp)
        b = g_homogeneous(medium[0], medium[1], mode, z, zp)
        assert abs(a - b) <= 1e-12


def _random_stack(rng, mirrors):
    media = [VACUUM, GAIN_09, LOSS_09, MIXED]
    layers = [Layer(media[rng.integers(4)], media[rng.integers(4)], rng.uniform(0.2, 1.5))
              for _ in range(4)]
    if not mirrors:
        layers[0] = layers[0].with_thickness(np.inf)
        layers[-1] = layers[-1].with_thickness(np.inf)
    return Stack(layers, mirrors)


@pytest.mark.parametrize("mirrors", [False, True])
def test_reciprocity(mirrors):
    rng = np.random.default_rng(17)
    for _ in range(30):
        st_ = _random_stack(rng, mirrors)
        hi = st_.total_thickness if mirrors else 3.0
        lo = 0.0 if mirrors else -1.0
        mode = TransverseMode(rng.choice(["TE", "TM"]), rng.uniform(0, 2), rng.uniform(0.05, 2))
        z, zp = rng.uniform(lo, hi, 2)
        a, b = g_scalar(st_, mode, z, zp), g_scalar(st_, mode, zp, z)
        assert a == pytest.approx(b, rel=1e-12)
        assert np.isfinite(a)


@pytest.mark.parametrize("sigma", ["TE", "TM"])
def test_mirrored_vacuum_matches_bvp(sigma):
    st_ = Stack([VAC], mirrors=True)
    mode = TransverseMode(sigma, 0.0, 1.0)
    z, G = bvp_green(st_, mode, 0.5, n=20000)
    for zz in (0.1, 0.5, 0.8):
        assert g_scalar(st_, mode, zz, 0.5) == pytest.approx(np.interp(zz, z, G), abs=1e-6)
    # closed form: with a Neumann (TM) mirror pair, G(0.5, 0.5) = (1 + e^-1)^2 / (2 (1 - e^-2))
    if sigma == "TM":
        expected = (1 + np.exp(-1)) ** 2 / (2 * (1 - np.exp(-2)))
    else:
        expected = (1 - np.exp(-1)) ** 2 / (2 * (1 - np.exp(-2)))
    assert g_scalar(st_, mode, 0.5, 0.5) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("mirrors", [False, True])
@pytest.mark.parametrize("sigma", ["TE", "TM"])
def test_layered_stack_matches_bvp(mirrors, sigma):
    st_ = Stack([Layer(LOSS_09, VACUUM, 0.7), Layer(VACUUM, GAIN_09, 0.4),
                 Layer(GAIN_09, LOSS_09, 0.9)], mirrors)
    mode = TransverseMode(sigma, 0.8, 1.3)
    z, G = bvp_green(st_, mode, 0.55, n=40000)
    for zz in (0.1, 0.55, 0.9, 1.6, 1.99):
        assert g_scalar(st_, mode, zz, 0.55) == pytest.approx(np.interp(zz, z, G), abs=2e-7)


def test_positive_for_passive_single_layer():
    st_ = Stack([Layer(LOSS_09, LOSS_09, 1.3)], mirrors=True)
    for sigma in ("TE", "TM"):
        for q in (0.0, 0.5, 3.0):
            for w in (0.1, 1.0, 4.0):
                mode = TransverseMode(sigma, q, w)
                for zz in (0.05, 0.6, 1.2):
                    assert g_scalar(st_, mode, zz, 0.6) > 0


def test_outside_mirrored_stack_rejected():
    st_ = Stack([VAC], mirrors=True)
    with pytest.raises(DomainError):
        g_scalar(st_, TransverseMode("TE", 0.0, 1.0), 1.5, 0.5)


def test_mixed_derivative_matches_finite_differences():
    st_ = Stack([Layer(LOSS_09, VACUUM, np.inf), Layer(GAIN_09, MIXED, 0.6),
                 Layer(VACUUM, LOSS_09, np.inf)])
    mode = TransverseMode("TE", 0.7, 0.9)
    h = 1e-4
    for z, zp in ((-0.3, 0.2), (0.1, 0.5), (0.4, 1.1)):
        num = -(g_scalar(st_, mode, z + h, zp + h) - g_scalar(st_, mode, z + h, zp - h)
                - g_scalar(st_, mode, z - h, zp + h) + g_scalar(st_, mode, z - h, zp - h)) / (4 * h * h)
        assert g_mixed_derivative(st_, mode, z, zp) == pytest.approx(num, rel=1e-6)


def test_gamma_vacuum_examples():
    st_ = Stack([VAC])
    tm = gamma_entries(st_, TransverseMode("TM", 0.0, 1.0))
    expected = np.array([[0.5, np.exp(-1) / 2], [np.exp(-1) / 2, 0.5]])
    np.testing.assert_allclose(tm, expected, rtol=1e-14)
    assert tm[0, 1] == pytest.approx(0.1839397, abs=1e-7)
    te = gamma_entries(st_, TransverseMode("TE", 0.0, 1.0))
    np.testing.assert_allclose(te, tm, rtol=1e-14)
    assert np.linalg.det(tm) == pytest.approx(0.25 * (1 - np.exp(-2)), rel=1e-13)
    assert np.linalg.det(tm) == pytest.approx(0.2161662, abs=1e-7)
    # TE entries scale as Q^2 at other modes
    mode = TransverseMode("TE", 1.2, 0.5)
    Q2 = 1.2 ** 2 + 0.5 ** 2
    np.testing.assert_allclose(gamma_entries(st_, mode),
                               Q2 * gamma_entries(st_, TransverseMode("TM", 1.2, 0.5)), rtol=1e-13)


def test_gamma_requires_mirrorless_stack():
    with pytest.raises(DomainError):
        gamma_entries(Stack([VAC], mirrors=True), TransverseMode("TM", 0.0, 1.0))


def test_gamma_determinant_tracks_slab_log():
    # differences of ln det Gamma between two separations equal those of ln(1 - e^{-2Qd})
    for sigma in ("TE", "TM"):
        for q, w in ((0.0, 1.0), (0.7, 0.3), (2.0, 1.5)):
            mode = TransverseMode(sigma, q, w)
            Q = np.hypot(q, w)
            a = (np.log(np.linalg.det(gamma_entries(Stack([VAC.with_thickness(1.0)]), mode)))
                 - np.log(np.linalg.det(gamma_entries(Stack([VAC.with_thickness(1.7)]), mode))))
            b = np.log1p(-np.exp(-2 * Q)) - np.log1p(-np.exp(-2 * Q * 1.7))
            assert a == pytest.approx(b, abs=1e-10)


def test_gamma_determinant_reproduces_three_layer_log():
    # ln det Gamma plus the unconstrained ln D of the middle layer varies with the
    # middle thickness exactly like the three-layer log with the opposite terminal
    # sign: the value constraint (TM) is a -1 mirror for its scalar function, the
    # derivative constraint (TE) a +1 mirror.
    def stack(d2, mirrors):
        return Stack([Layer(LOSS_09, VACUUM, 0.6), Layer(GAIN_09, LOSS_09, d2),
                      Layer(VACUUM, GAIN_09, 0.8)], mirrors)

    for sigma, sign in (("TM", -1.0), ("TE", 1.0)):
        for q, w in ((0.5, 0.7), (1.2, 0.3), (0.1, 2.0)):
            mode = TransverseMode(sigma, q, w)

            def total(d2):
                st_ = stack(d2, False)
                return np.log(np.linalg.det(gamma_entries(st_, mode))) + np.log(d_factor(st_, 1, mode))

            a = total(1.0) - total(1.4)
            b = (three_layer_log(stack(1.0, True), sigma, q, w, sign)
                 - three_layer_log(stack(1.4, True), sigma, q, w, sign))
            assert a == pytest.approx(b, abs=1e-12)


@pytest.mark.parametrize("dz", [0.0, 0.4, 1.3])
def test_dyadic_identities_against_fourier_construction(dz):
    rng = np.random.default_rng(3)
    st_ = Stack([Layer(LOSS_09, VACUUM, np.inf)])
    for _ in range(7):
        q, w = rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)
        mode = TransverseMode("TE", q, w)
        eps = eval_imag_axis(LOSS_09, w)
        assert dyadic_yy(st_, mode, 0.0, dz) == pytest.approx(
            bulk_dyadic_numeric(eps, 1.0, q, w, dz, "yy"), rel=1e-8)
        assert dyadic_zz_regular(st_, mode, 0.0, dz) == pytest.approx(
            bulk_dyadic_numeric(eps, 1.0, q, w, dz, "zz_regular"), rel=1e-8)


@pytest.mark.parametrize("sigma", ["TE", "TM"])
def test_scaling_covariance(sigma):
    k = 3.0
    base = Stack([Layer(GAIN_09, LOSS_09, 0.8), Layer(MIXED, VACUUM, 0.5)], mirrors=True)
    scaled = Stack([Layer(GAIN_09.scaled(k), LOSS_09.scaled(k), 0.8 / k),
                    Layer(MIXED.scaled(k), VACUUM, 0.5 / k)], mirrors=True)
    a = g_scalar(base, TransverseMode(sigma, 0.6, 0.9), 0.3, 1.0)
    b = g_scalar(scaled, TransverseMode(sigma, 0.6 * k, 0.9 * k), 0.3 / k, 1.0 / k)
    # G has units of length
    assert b == pytest.approx(a / k, rel=1e-12)
