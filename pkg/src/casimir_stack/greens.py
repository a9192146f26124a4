"""Scalar TE/TM Green functions of layered media at imaginary frequency.

The TE function solves

    -d/dz (1/mu) dG/dz + (q^2/mu + w^2 eps) G = delta(z - z')

and the TM function the same with eps and mu exchanged. Inside a layer
both reduce to weight * exp(-Q |z - z'|) / (2 Q) plus reflected waves,
where the weight is mu for TE and eps for TM.

G is built as phi_<(z_<) phi_>(z_>) / W from the left- and right-regular
solutions. Each is written layer by layer with the generalized reflection
coefficients and normalized at a layer edge, so no growing exponential
is ever formed.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, RoundTripGainError
from .response import ResponseModel, eval_imag_axis
from .stack import (Layer, Polarization, Stack, TransverseMode, mode_data, q_long)


def g_homogeneous(eps: ResponseModel, mu: ResponseModel, mode: TransverseMode, z: float, zp: float):
    """Bulk Green function weight * exp(-Q |z - z'|) / (2 Q)."""
    layer = Layer(eps, mu, np.inf)
    Q = q_long(layer, mode)
    weight = eval_imag_axis(mu if mode.sigma is Polarization.TE else eps, mode.w)
    return weight * np.exp(-Q * abs(z - zp)) / (2.0 * Q)


def _parts(stack: Stack, mode: TransverseMode, z: float, zp: float):
    """Return (G, lambda_<(z_<), lambda_>(z_>)), the lambdas being the
    logarithmic derivatives of the left- and right-regular solutions."""
    data = mode_data(stack, mode)
    left, right = stack.edges()
    a, b = (z, zp) if z <= zp else (zp, z)
    l, j = stack.locate(a), stack.locate(b)
    Q, r_minus, r_plus = data.Q, data.r_minus, data.r_plus

    def from_left(k, x):
        # r_{k-} exp(-2 Q_k (x - L_k))
        if not np.isfinite(left[k]):
            return np.zeros_like(Q[k])
        return r_minus[k] * np.exp(-2.0 * Q[k] * (x - left[k]))

    def from_right(k, x):
        if not np.isfinite(right[k]):
            return np.zeros_like(Q[k])
        return r_plus[k] * np.exp(-2.0 * Q[k] * (right[k] - x))

    if np.isfinite(left[j]) and np.isfinite(right[j]):
        e_j = np.exp(-2.0 * Q[j] * (right[j] - left[j]))
    else:
        e_j = np.zeros_like(Q[j])
    D = 1.0 - r_minus[j] * r_plus[j] * e_j
    if np.any(D <= 0):
        raise RoundTripGainError(f"round-trip factor of layer {j} is nonpositive",
                                 sigma=mode.sigma, q=mode.q, w=mode.w)

    y = from_right(j, b)
    if l == j:
        x_a = from_left(j, a)
        G = np.exp(-Q[j] * (b - a)) * (1.0 + x_a) * (1.0 + y)
    else:
        x_a = from_left(l, a)
        ratio = np.exp(-Q[l] * (right[l] - a)) * (1.0 + x_a) / (1.0 + from_left(l, right[l]))
        for k in range(l + 1, j):
            dk = right[k] - left[k]
            ratio = ratio * np.exp(-Q[k] * dk) * (1.0 + r_minus[k]) / (1.0 + from_left(k, right[k]))
        G = ratio * np.exp(-Q[j] * (b - left[j])) * (1.0 + r_minus[j]) * (1.0 + y)
    G = data.weight[j] * G / (2.0 * Q[j] * D)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_lt = Q[l] * (1.0 - x_a) / (1.0 + x_a)
        lam_gt = -Q[j] * (1.0 - y) / (1.0 + y)
    return G, lam_lt, lam_gt


def g_scalar(stack: Stack, mode: TransverseMode, z: float, zp: float):
    """Scalar Green function of ``stack`` for polarization ``mode.sigma``."""
    G = _parts(stack, mode, z, zp)[0]
    return float(G) if np.ndim(G) == 0 else G


def g_mixed_derivative(stack: Stack, mode: TransverseMode, z: float, zp: float):
    """-d/dz d/dz' G without the contact term at z = z'."""
    G, lam_lt, lam_gt = _parts(stack, mode, z, zp)
    out = np.where(G == 0, 0.0, -lam_lt * lam_gt * G)
    return float(out) if np.ndim(out) == 0 else out


def gamma_entries(stack: Stack, mode: TransverseMode) -> np.ndarray:
    """Boundary matrix built from the Green function at the conductor planes.

    TM entries are G at (z1, z1), (z1, z2), (z2, z2); TE entries are the
    mixed normal derivatives -d_z d_z' G at the same pairs. The stack must
    be mirrorless: the matrix itself carries the conductor constraints
    (a value constraint for TM, a derivative constraint for TE).
    """
    if stack.mirrors:
        raise DomainError("gamma_entries expects a mirrorless stack")
    z1, z2 = stack.conductor_positions()
    fn = g_scalar if mode.sigma is Polarization.TM else g_mixed_derivative
    g11 = fn(stack, mode, z1, z1)
    g12 = fn(stack, mode, z1, z2)
    g22 = fn(stack, mode, z2, z2)
    return np.array([[g11, g12], [g12, g22]])


def dyadic_yy(stack: Stack, mode: TransverseMode, z: float, zp: float):
    """yy component of the dyadic Green tensor (q along x); equals the TE function."""
    return g_scalar(stack, TransverseMode(Polarization.TE, mode.q, mode.w), z, zp)


def dyadic_zz_regular(stack: Stack, mode: TransverseMode, z: float, zp: float):
    """zz component of the dyadic Green tensor without its delta term.

    On the imaginary axis the real-frequency factor q^2 / (eps eps' omega^2)
    becomes -q^2 / (eps eps' w^2).
    """
    g = g_scalar(stack, TransverseMode(Polarization.TM, mode.q, mode.w), z, zp)
    eps_z = eval_imag_axis(stack.layers[stack.locate(z)].eps, mode.w)
    eps_zp = eval_imag_axis(stack.layers[stack.locate(zp)].eps, mode.w)
    return -np.asarray(mode.q) ** 2 / (eps_z * eps_zp * np.asarray(mode.w) ** 2) * g
