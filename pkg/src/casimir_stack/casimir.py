"""Casimir forces and energies per unit area between two perfect mirrors.

Reduced units: hbar = c = 1, frequencies in the reference frequency,
lengths in c / omega_ref. Forces come out in hbar omega_ref^4 / c^3 and
energies per area in hbar omega_ref^3 / c^2.

Mode integrals run over q in (0, inf) and imaginary frequency w in
(0, inf). With d^2q = 2 pi q dq the single-slab force is

    F = -(1 / (2 pi^2)) int dw int q dq  2 Q / (e^{2 Q d} - 1)

and the energies are

    E = (1 / (4 pi^2)) int dw int q dq  sum_sigma ln(...)

so that F = -dE/dd. All integrals are done in variables scaled by a
reference length, which keeps the quadrature tolerances relative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (AccuracyError, ClassificationError, DomainError, MappingError,
                     RoundTripGainError)
from .quad import (IntegralEstimate, QuadratureSpec, find_root_monotone, integrate_2d_semi_inf,
                   integrate_interval, integrate_semi_inf)
from .response import (Kind, MediumClass, ResponseModel, classify, eval_imag_axis,
                       n_static, refractive_index_imag)
from .stack import MIRROR_REFLECTION, Layer, Polarization, Stack, TransverseMode, r_interface

__all__ = [
    "QuadratureSpec", "ForceResult", "force_vacuum", "energy_vacuum", "force_slab_qw",
    "force_slab_s", "force_slab_w", "omega_of_s", "energy_slab", "action_3layer",
    "three_layer_log", "energy_lifshitz", "lifshitz_log", "force_from_action",
    "BoundsRow", "BoundsReport", "bounds_check",
]


@dataclass(frozen=True)
class ForceResult:
    value: float
    error_estimate: float
    evaluations: int
    diagnostics: tuple[str, ...] = field(default_factory=tuple)


def force_vacuum(d: float) -> float:
    """-pi^2 / (240 d^4)."""
    if not d > 0:
        raise DomainError("separation must be positive")
    return -np.pi ** 2 / (240.0 * d ** 4)


def energy_vacuum(d: float) -> float:
    """-pi^2 / (720 d^3), whose negative derivative is force_vacuum."""
    if not d > 0:
        raise DomainError("separation must be positive")
    return -np.pi ** 2 / (720.0 * d ** 3)


def _bose(x, truncation: float):
    """x / (e^x - 1) with its series near 0 and a hard cut at x > 2 * truncation."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-6
    cut = x > 2.0 * truncation
    safe = np.where(small | cut, 1.0, x)
    out = safe / np.expm1(safe)
    out = np.where(small, 1.0 - 0.5 * x, out)
    return np.where(cut, 0.0, out)


def _finish(est: IntegralEstimate, prefactor: float, what: str, diagnostics=()) -> ForceResult:
    value = prefactor * est.value
    err = abs(prefactor) * est.error_estimate
    if not est.converged:
        raise AccuracyError(f"{what}: quadrature did not converge", estimate=value, error=err)
    return ForceResult(value, err, est.evaluations, tuple(diagnostics))


def _check_d(d: float) -> None:
    if not (np.isfinite(d) and d > 0):
        raise DomainError(f"separation must be positive and finite, got {d}")


def force_slab_qw(eps: ResponseModel, mu: ResponseModel, d: float,
                  quad: QuadratureSpec = QuadratureSpec()) -> ForceResult:
    """Single-slab force as a nested (w, q) integral.

    In x = w d, y = q d the integrand is y * 2K / (e^{2K} - 1) with
    K = sqrt(y^2 + x^2 n(ix/d)^2), and F carries a factor 1/d^4.
    """
    _check_d(d)
    tight = quad.tightened(10.0)

    def f(x, y):
        n = float(refractive_index_imag(eps, mu, x / d))
        K = np.sqrt(y * y + (x * n) ** 2)
        return y * _bose(2.0 * K, quad.truncation)

    est = integrate_2d_semi_inf(f, tight, scale_x=0.5, scale_y=0.5)
    return _finish(est, -1.0 / (2.0 * np.pi ** 2 * d ** 4), "force_slab_qw", ("method=qw",))


def _mapping_class(eps: ResponseModel, mu: ResponseModel) -> MediumClass:
    cls = classify(eps, mu)
    if cls is MediumClass.MIXED:
        raise MappingError("mixed gain/loss media have no monotone w -> w n(iw) map")
    return cls


@lru_cache(maxsize=64)
def _check_monotone(eps: ResponseModel, mu: ResponseModel) -> None:
    w = np.logspace(-4, 4, 4001)
    s = w * refractive_index_imag(eps, mu, w)
    if not np.all(np.diff(s) > 0):
        i = int(np.argmin(np.diff(s)))
        raise MappingError(f"w n(iw) is not strictly increasing near w={w[i]:.4g}")


def omega_of_s(eps: ResponseModel, mu: ResponseModel, s, tol: float = 1e-12):
    """Invert s = w n(iw) for w; ``s`` may be an array of positive values."""
    cls = _mapping_class(eps, mu)
    s_arr = np.asarray(s, dtype=float)
    if np.any(~(s_arr > 0)):
        raise DomainError("s must be positive")
    if cls is MediumClass.VACUUM or (eps.kind is Kind.VACUUM and mu.kind is Kind.VACUUM):
        return float(s_arr) if s_arr.ndim == 0 else s_arr.copy()
    _check_monotone(eps, mu)
    n0 = n_static(eps, mu)
    # n(iw) moves monotonically from n_static toward 1, so w lies between s and s / n_static.
    lo = np.minimum(s_arr, s_arr / n0)
    hi = np.maximum(s_arr, s_arr / n0)
    # widen by a few ulps so the exact endpoints always straddle
    lo = lo * (1.0 - 1e-14)
    hi = hi * (1.0 + 1e-14)

    def ratio(w):
        return w * refractive_index_imag(eps, mu, w) / s_arr

    return find_root_monotone(ratio, np.ones_like(s_arr), (lo, hi), tol=tol)


def force_slab_s(eps: ResponseModel, mu: ResponseModel, d: float,
                 quad: QuadratureSpec = QuadratureSpec()) -> ForceResult:
    """Single-slab force from F = -(1/pi^2) int ds s^2 w(s) / (e^{2sd} - 1)."""
    _check_d(d)
    _mapping_class(eps, mu)
    tight = quad.tightened(10.0)

    def f(u):
        # u = s d; w(s) d = omega_of_s(u/d) * d
        w = omega_of_s(eps, mu, u / d) * d
        return u * w * _bose(2.0 * u, quad.truncation) / 2.0

    est = integrate_semi_inf(f, tight, scale=0.5)
    return _finish(est, -1.0 / (np.pi ** 2 * d ** 4), "force_slab_s", ("method=s",))


def _n_and_slope(eps: ResponseModel, mu: ResponseModel, w: np.ndarray):
    """n(iw) and dn/dw, analytic for Lorentz sums, finite differences otherwise."""
    def model_and_slope(m: ResponseModel):
        v = eval_imag_axis(m, w)
        if m.kind is Kind.VACUUM:
            return v, np.zeros_like(w)
        if m.kind is Kind.LORENTZ_SUM:
            dv = np.zeros_like(w)
            for t in m.terms:
                den = t.omega_0 ** 2 + w * w + t.gamma * w
                dv = dv - t.signed_strength * (2.0 * w + t.gamma) / (den * den)
            return v, dv
        h = 1e-6 * np.maximum(w, 1e-3)
        lo = np.maximum(w - h, 0.0)
        return v, (eval_imag_axis(m, w + h) - eval_imag_axis(m, lo)) / (w + h - lo)

    e, de = model_and_slope(eps)
    m, dm = model_and_slope(mu)
    n = np.sqrt(e * m)
    return n, (de * m + e * dm) / (2.0 * n)


def force_slab_w(eps: ResponseModel, mu: ResponseModel, d: float,
                 quad: QuadratureSpec = QuadratureSpec()) -> ForceResult:
    """Single-slab force integrated over w: -(1/pi^2) int dw w s^2 s'(w) / (e^{2sd} - 1).

    Here s = w n(iw). This form needs no inverse map and therefore also
    applies to mixed gain/loss media.
    """
    _check_d(d)
    tight = quad.tightened(10.0)

    def f(x):
        w = x / d
        n, dn = _n_and_slope(eps, mu, w)
        u = x * n
        slope = n + w * dn
        return x * u * slope * _bose(2.0 * u, quad.truncation) / 2.0

    est = integrate_semi_inf(f, tight, scale=0.5)
    return _finish(est, -1.0 / (np.pi ** 2 * d ** 4), "force_slab_w", ("method=w",))


def _polar_mode_integral(log_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                         length: float, quad: QuadratureSpec) -> IntegralEstimate:
    """int_0^inf dw int_0^inf q dq log_fn(q, w) in polar coordinates.

    q = rho cos(theta), w = rho sin(theta); theta runs over (0, pi/2) and
    rho is scaled by ``length``. Returns the integral times length^3.
    """
    inner_quad = quad.tightened(10.0)
    counter = {"evals": 0, "ok": True}

    def outer(thetas):
        out = np.empty(thetas.size)
        c_all, s_all = np.cos(thetas), np.sin(thetas)
        for i in range(thetas.size):
            c, s = c_all[i], s_all[i]

            def inner(u):
                rho = u / length
                return u * u * c * log_fn(rho * c, rho * s)

            est = integrate_semi_inf(inner, inner_quad, scale=0.5)
            counter["evals"] += est.evaluations
            counter["ok"] &= est.converged
            out[i] = est.value
        return out

    res = integrate_interval(outer, 0.0, 0.5 * np.pi, quad)
    err = res.error_estimate + inner_quad.rel_tol * abs(res.value) + inner_quad.abs_tol
    return IntegralEstimate(res.value, err, res.evaluations + counter["evals"],
                            res.converged and counter["ok"])


def _log_checked(excess, sigma, q, w):
    """ln(1 + excess), raising when 1 + excess <= 0."""
    excess = np.asarray(excess, dtype=float)
    bad = ~(excess > -1.0)
    if np.any(bad):
        i = int(np.flatnonzero(bad.ravel())[0])
        qi = np.broadcast_to(q, excess.shape).ravel()[i]
        wi = np.broadcast_to(w, excess.shape).ravel()[i]
        raise RoundTripGainError(f"nonpositive log argument for {sigma.value} at q={qi:.6g}, w={wi:.6g}",
                                 sigma=sigma, q=float(qi), w=float(wi))
    return np.log1p(excess)


def _q_of(layer: Layer, q, w):
    n2 = eval_imag_axis(layer.eps, w) * eval_imag_axis(layer.mu, w)
    return np.sqrt(q * q + w * w * n2)


def _exp_neg(x):
    with np.errstate(under="ignore"):
        return np.exp(-x)


def three_layer_log(stack3: Stack, sigma, q, w, mirror_sign: float | None = None):
    """Logarithm of the three-layer mode factor.

    ln[(1 + m r_- e_1)(1 + m r_+ e_3) - (r_- + m e_1)(r_+ + m e_3) e_2]

    with r_-, r_+ the bare interface reflections seen from the middle
    layer, e_i = exp(-2 Q_i d_i) and m the mirror reflection of the
    polarization (+1 for TM, -1 for TE). It equals
    ln[(1 + m r_- e_1)(1 + m r_+ e_3)] + ln D of the middle layer of the
    mirrored stack; the first term does not depend on d_2.
    """
    sigma = Polarization(sigma)
    if len(stack3) != 3 or not all(layer.finite for layer in stack3.layers):
        raise DomainError("three finite layers required")
    m = MIRROR_REFLECTION[sigma] if mirror_sign is None else float(mirror_sign)
    l1, l2, l3 = stack3.layers
    q = np.asarray(q, dtype=float)
    w = np.asarray(w, dtype=float)
    mode = TransverseMode(sigma, q, w)
    r_minus = r_interface(l2, l1, mode)
    r_plus = r_interface(l2, l3, mode)
    e1 = _exp_neg(2.0 * _q_of(l1, q, w) * l1.thickness)
    e2 = _exp_neg(2.0 * _q_of(l2, q, w) * l2.thickness)
    e3 = _exp_neg(2.0 * _q_of(l3, q, w) * l3.thickness)
    # argument minus one, expanded so that log1p keeps full precision
    excess = (m * (r_minus * e1 + r_plus * e3) + r_minus * r_plus * e1 * e3
              - (r_minus + m * e1) * (r_plus + m * e3) * e2)
    return _log_checked(excess, sigma, q, w)


def lifshitz_log(left: Layer, mid: Layer, right: Layer, sigma, q, w):
    """ln(1 - r_+ r_- exp(-2 Q_2 d_2)) for two half spaces around ``mid``."""
    sigma = Polarization(sigma)
    q = np.asarray(q, dtype=float)
    w = np.asarray(w, dtype=float)
    mode = TransverseMode(sigma, q, w)
    r_minus = r_interface(mid, left, mode)
    r_plus = r_interface(mid, right, mode)
    e2 = _exp_neg(2.0 * _q_of(mid, q, w) * mid.thickness)
    return _log_checked(-r_plus * r_minus * e2, sigma, q, w)


def _energy(log_fn, length: float, quad: QuadratureSpec, what: str) -> ForceResult:
    def both(q, w):
        return log_fn(Polarization.TE, q, w) + log_fn(Polarization.TM, q, w)

    est = _polar_mode_integral(both, length, quad)
    return _finish(est, 1.0 / (4.0 * np.pi ** 2 * length ** 3), what)


def energy_slab(eps: ResponseModel, mu: ResponseModel, d: float,
                quad: QuadratureSpec = QuadratureSpec()) -> ForceResult:
    """Mode integral of ln(1 - e^{-2Qd}) for a homogeneous slab between mirrors."""
    _check_d(d)
    layer = Layer(eps, mu, d)

    def log_fn(sigma, q, w):
        e = _exp_neg(2.0 * _q_of(layer, q, w) * d)
        return _log_checked(-e, Polarization(sigma), q, w)

    return _energy(log_fn, d, quad, "energy_slab")


def action_3layer(stack3: Stack, quad: QuadratureSpec = QuadratureSpec()) -> ForceResult:
    """Energy per area of three finite layers between mirrors (TE + TM).

    Defined up to a constant that does not depend on the middle
    thickness; only differences and derivatives are meaningful.
    """
    if len(stack3) != 3 or not all(layer.finite for layer in stack3.layers):
        raise DomainError("action_3layer needs exactly three finite layers")
    length = min(layer.thickness for layer in stack3.layers)
    return _energy(lambda sigma, q, w: three_layer_log(stack3, sigma, q, w),
                   length, quad, "action_3layer")


def energy_lifshitz(left: Layer, mid: Layer, right: Layer,
                    quad: QuadratureSpec = QuadratureSpec()) -> ForceResult:
    """Energy per area of a finite layer between two half spaces."""
    if not mid.finite:
        raise DomainError("the middle layer must be finite")
    return _energy(lambda sigma, q, w: lifshitz_log(left, mid, right, sigma, q, w),
                   mid.thickness, quad, "energy_lifshitz")


def force_from_action(energy_fn: Callable[[float], float | ForceResult], d: float,
                      which: str | None = None, rel_tol: float = 1e-4) -> ForceResult:
    """-dE/dd by central differences (h = 1e-3 d) and one Richardson step.

    ``energy_fn`` maps a separation to an energy (float or ForceResult).
    ``which`` is a label for the varied parameter and only ends up in the
    diagnostics. Raises AccuracyError when the two difference quotients
    disagree by more than ten times ``rel_tol``.
    """
    _check_d(d)
    evals = 0
    noise = 0.0

    def energy(x):
        nonlocal evals, noise
        e = energy_fn(x)
        if isinstance(e, ForceResult):
            evals += e.evaluations
            noise = max(noise, e.error_estimate)
            return e.value
        return float(e)

    h = 1e-3 * d
    e_lo, e_hi = energy(d - h), energy(d + h)
    e_lo2, e_hi2 = energy(d - 0.5 * h), energy(d + 0.5 * h)
    d_coarse = (e_lo - e_hi) / (2.0 * h)
    d_fine = (e_lo2 - e_hi2) / h
    value = (4.0 * d_fine - d_coarse) / 3.0
    err = abs(value - d_fine) + noise / h
    scale = max(abs(value), np.finfo(float).tiny)
    if abs(value - d_fine) > 10.0 * rel_tol * scale:
        raise AccuracyError("Richardson estimate is inconsistent", estimate=value, error=err)
    diags = ("derivative=central+richardson",) + ((f"varied={which}",) if which else ())
    return ForceResult(float(value), float(err), evals, diags)


@dataclass(frozen=True)
class BoundsRow:
    d: float
    force: float
    f_vac: float
    lower: float
    upper: float
    margin: float
    passed: bool


@dataclass(frozen=True)
class BoundsReport:
    medium: MediumClass
    n_static: float
    rows: tuple[BoundsRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


def bounds_check(eps: ResponseModel, mu: ResponseModel, d_grid: Sequence[float],
                 quad: QuadratureSpec = QuadratureSpec(), method: str = "qw") -> BoundsReport:
    """Check F_vac / n_static <= F <= F_vac (amplifying) or
    F_vac <= F <= F_vac / n_static (passive) at every d.

    ``margin`` is the distance to the nearer bound (negative on failure).
    For vacuum both bounds coincide and the row passes when F matches
    F_vac within the quadrature tolerance.
    """
    cls = classify(eps, mu)
    if cls is MediumClass.MIXED:
        raise ClassificationError("bounds apply only to passive or fully amplifying media")
    force_fn = {"qw": force_slab_qw, "s": force_slab_s, "w": force_slab_w}[method]
    n0 = n_static(eps, mu)
    rows = []
    for d in d_grid:
        res = force_fn(eps, mu, float(d), quad)
        fv = force_vacuum(float(d))
        lower, upper = min(fv, fv / n0), max(fv, fv / n0)
        margin = min(res.value - lower, upper - res.value)
        if cls is MediumClass.VACUUM:
            ok = abs(res.value - fv) <= 10.0 * quad.rel_tol * abs(fv)
        else:
            ok = margin > 0
        rows.append(BoundsRow(float(d), res.value, fv, lower, upper, float(margin), bool(ok)))
    return BoundsReport(cls, n0, tuple(rows))
