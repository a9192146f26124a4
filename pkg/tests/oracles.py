"""Independent reference computations used only by the tests."""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from casimir_stack.response import eval_imag_axis
from casimir_stack.stack import MIRROR_REFLECTION, Polarization


def bvp_green(stack, mode, zp, n=20000, pad=12.0):
    """Finite-volume solution of the 1D Green-function problem.

    Mirrored stacks use Dirichlet (reflection -1) or Neumann (+1) ends.
    Mirrorless stacks are padded by ``pad`` decay lengths of the outer
    media and closed with Dirichlet ends. Returns (z grid, G values).
    """
    sigma = Polarization(mode.sigma)
    w, q = float(mode.w), float(mode.q)
    left, right = stack.edges()
    if stack.mirrors:
        lo, hi = 0.0, stack.total_thickness
    else:
        inner_lo = left[1] if len(stack) > 1 else 0.0
        inner_hi = right[-2] if len(stack) > 1 else 0.0
        lo = min(inner_lo, zp) - pad
        hi = max(inner_hi, zp) + pad
    # Nodes fall exactly on the interfaces and on the source point.
    breaks = sorted({lo, hi, zp, *[x for x in stack.interfaces() if lo < x < hi]})
    pieces = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        m = max(2, int(round(n * (b - a) / (hi - lo))))
        pieces.append(np.linspace(a, b, m + 1)[:-1])
    z = np.concatenate(pieces + [np.array([hi])])
    n = z.size - 1
    h = np.diff(z)
    zm = 0.5 * (z[1:] + z[:-1])

    def coeffs(x):
        idx = np.array([stack.locate(v) for v in x])
        eps = np.array([eval_imag_axis(stack.layers[i].eps, w) for i in range(len(stack))])[idx]
        mu = np.array([eval_imag_axis(stack.layers[i].mu, w) for i in range(len(stack))])[idx]
        if sigma is Polarization.TE:
            return 1.0 / mu, q * q / mu + w * w * eps
        return 1.0 / eps, q * q / eps + w * w * mu

    p_half, k_half = coeffs(zm)
    # reaction term integrated over each node's control volume
    kv = np.zeros(n + 1)
    kv[:-1] += 0.5 * h * k_half
    kv[1:] += 0.5 * h * k_half
    diag = kv.copy()
    diag[:-1] += p_half / h
    diag[1:] += p_half / h
    off = -p_half / h
    rhs = np.zeros(n + 1)
    i0 = int(np.argmin(np.abs(z - zp)))
    rhs[i0] = 1.0
    ab = np.zeros((3, n + 1))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    dirichlet_ends = [0, n]
    if stack.mirrors and MIRROR_REFLECTION[sigma] > 0:
        dirichlet_ends = []
    for i in dirichlet_ends:
        ab[1, i] = 1.0
        if i + 1 <= n:
            ab[0, i + 1] = 0.0
        if i - 1 >= 0:
            ab[2, i - 1] = 0.0
        rhs[i] = 0.0
    return z, solve_banded((1, 1), ab, rhs)


def bulk_dyadic_numeric(eps_val, mu_val, q, w, dz, component):
    """Inverse Fourier transform in k_z of the bulk dyadic Green tensor.

    In (q, k_z) space with q along x the tensor is
    mu [1 + k k / (eps mu w^2)] / (k_z^2 + Q^2) on the imaginary axis
    (the Wick-rotated sign of the longitudinal term included). The
    yy and the regular part of the zz components are transformed by
    quadrature.
    """
    from scipy.integrate import quad

    Q2 = q * q + w * w * eps_val * mu_val
    if component == "yy":
        f = lambda k: mu_val / (k * k + Q2)
    elif component == "zz_regular":
        # mu (1 - k_z^2/(n^2 w^2)) / (k_z^2 + Q^2) minus its constant part
        f = lambda k: -q * q / (eps_val * w * w) / (k * k + Q2)
    else:
        raise ValueError(component)
    import warnings

    warnings.simplefilter("ignore")
    if dz == 0:
        val, _ = quad(f, 0, np.inf, epsabs=1e-14, epsrel=1e-12)
    else:
        val, _ = quad(f, 0, np.inf, weight="cos", wvar=abs(dz), epsabs=1e-14, epsrel=1e-12, limlst=200)
    return val / np.pi
