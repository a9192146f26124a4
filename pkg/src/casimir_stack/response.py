"""Causal electric and magnetic response functions with gain and/or loss.

Three kinds of model are supported: vacuum, a sum of signed Lorentz
oscillators, and a tabulated imaginary part on the positive real axis
(piecewise linear, odd in frequency, zero beyond the last sample).

All frequencies are in units of the reference frequency.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import xlogy

from .errors import AccuracyError, DomainError, InvalidMediumError, UnsupportedEvaluationError
from .quad import QuadratureSpec, integrate_interval, integrate_semi_inf


class Sign(str, enum.Enum):
    LOSS = "loss"
    GAIN = "gain"


class Kind(str, enum.Enum):
    VACUUM = "vacuum"
    LORENTZ_SUM = "lorentz_sum"
    TABULATED_IMAG = "tabulated_imag"


class MediumClass(str, enum.Enum):
    PASSIVE = "passive"
    FULLY_AMPLIFYING = "fully_amplifying"
    MIXED = "mixed"
    VACUUM = "vacuum"


@dataclass(frozen=True)
class LorentzTerm:
    """One oscillator, omega_p**2 / (omega_0**2 - w**2 - i gamma w), added
    for loss and subtracted for gain."""

    omega_p: float
    omega_0: float
    gamma: float
    sign: Sign = Sign.LOSS

    def __post_init__(self):
        object.__setattr__(self, "sign", Sign(self.sign))
        for name in ("omega_p", "omega_0", "gamma"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v}")

    @property
    def signed_strength(self) -> float:
        s = 1.0 if self.sign is Sign.LOSS else -1.0
        return s * self.omega_p ** 2


@dataclass(frozen=True)
class ResponseModel:
    kind: Kind = Kind.VACUUM
    terms: tuple[LorentzTerm, ...] = ()
    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "table", tuple((float(a), float(b)) for a, b in self.table))
        if self.kind is Kind.LORENTZ_SUM and not self.terms:
            raise DomainError("lorentz_sum model needs at least one term")
        if self.kind is Kind.TABULATED_IMAG:
            if len(self.table) < 2:
                raise DomainError("tabulated model needs at least two points")
            om = np.array([p[0] for p in self.table])
            im = np.array([p[1] for p in self.table])
            if not (np.all(np.isfinite(om)) and np.all(np.isfinite(im))):
                raise DomainError("tabulated values must be finite")
            if om[0] <= 0 or np.any(np.diff(om) <= 0):
                raise DomainError("tabulated frequencies must be positive and strictly increasing")

    @classmethod
    def vacuum(cls) -> "ResponseModel":
        return cls(Kind.VACUUM)

    @classmethod
    def lorentz(cls, *terms: LorentzTerm) -> "ResponseModel":
        return cls(Kind.LORENTZ_SUM, terms=terms)

    @classmethod
    def tabulated(cls, points: Sequence[Sequence[float]]) -> "ResponseModel":
        return cls(Kind.TABULATED_IMAG, table=tuple(tuple(p) for p in points))

    @classmethod
    def from_dict(cls, data: dict) -> "ResponseModel":
        kind = data.get("type")
        if kind == "vacuum":
            return cls.vacuum()
        if kind == "lorentz":
            terms = [LorentzTerm(float(t["omega_p"]), float(t["omega_0"]), float(t["gamma"]),
                                 Sign(t.get("sign", "loss"))) for t in data["terms"]]
            return cls.lorentz(*terms)
        if kind == "tabulated":
            return cls.tabulated(data["points"])
        raise DomainError(f"unknown response model type {kind!r}")

    def to_dict(self) -> dict:
        if self.kind is Kind.VACUUM:
            return {"type": "vacuum"}
        if self.kind is Kind.LORENTZ_SUM:
            return {"type": "lorentz", "terms": [
                {"omega_p": t.omega_p, "omega_0": t.omega_0, "gamma": t.gamma, "sign": t.sign.value}
                for t in self.terms]}
        return {"type": "tabulated", "points": [list(p) for p in self.table]}

    def scaled(self, k: float) -> "ResponseModel":
        """Same medium with every frequency multiplied by ``k``."""
        if self.kind is Kind.LORENTZ_SUM:
            return ResponseModel.lorentz(*(LorentzTerm(k * t.omega_p, k * t.omega_0, k * t.gamma, t.sign)
                                           for t in self.terms))
        if self.kind is Kind.TABULATED_IMAG:
            return ResponseModel.tabulated([(k * a, b) for a, b in self.table])
        return self


VACUUM = ResponseModel.vacuum()


def _segments(model: ResponseModel):
    """Piecewise-linear segments (x0, x1, slope, intercept) of a table."""
    om = np.array([p[0] for p in model.table])
    im = np.array([p[1] for p in model.table])
    om = np.concatenate([[0.0], om])
    im = np.concatenate([[0.0], im])
    slope = np.diff(im) / np.diff(om)
    icpt = im[:-1] - slope * om[:-1]
    return om, im, slope, icpt


def imag_part(model: ResponseModel) -> Callable[[np.ndarray], np.ndarray]:
    """Return a vectorized function giving Im of the model on the real axis."""
    if model.kind is Kind.VACUUM:
        return lambda x: np.zeros_like(np.asarray(x, dtype=float))
    if model.kind is Kind.LORENTZ_SUM:
        terms = model.terms

        def im(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros_like(x)
            for t in terms:
                a = t.omega_0 ** 2 - x * x
                out = out + t.signed_strength * t.gamma * x / (a * a + (t.gamma * x) ** 2)
            return out
        return im
    om, vals, _, _ = _segments(model)

    def im_tab(x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        y = np.interp(ax, om, vals, right=0.0)
        return np.sign(x) * y
    return im_tab


def feature_points(model: ResponseModel) -> list[float]:
    """Frequencies where Im of the model has sharp structure."""
    if model.kind is Kind.LORENTZ_SUM:
        pts = []
        for t in model.terms:
            for k in (0.0, 1.0, 10.0, 100.0):
                pts += [t.omega_0 - k * t.gamma, t.omega_0 + k * t.gamma]
        return sorted(p for p in set(pts) if p > 0)
    if model.kind is Kind.TABULATED_IMAG:
        return [p[0] for p in model.table]
    return []


def _tabulated_real_axis(model: ResponseModel, omega: np.ndarray) -> np.ndarray:
    om, vals, b, a = _segments(model)
    w = np.abs(omega)[..., None]
    x0, x1 = om[:-1], om[1:]
    # Principal-value integral of xi*(a + b xi)/(xi^2 - w^2), exact per segment.
    lin = np.sum(b * (x1 - x0), axis=-1)
    c_minus = 0.5 * (a + b * w)        # coefficient of ln|xi - w|
    c_plus = 0.5 * (a - b * w)         # coefficient of ln|xi + w|
    n = om.size
    coef_m = np.zeros(w.shape[:-1] + (n,))
    coef_p = np.zeros(w.shape[:-1] + (n,))
    coef_m[..., 1:] += c_minus
    coef_m[..., :-1] -= c_minus
    coef_p[..., 1:] += c_plus
    coef_p[..., :-1] -= c_plus
    at_node = np.isclose(om, w, rtol=1e-14, atol=0.0)
    coef_m = np.where(at_node, 0.0, coef_m)
    logs = xlogy(coef_m, np.abs(om - w)) + xlogy(coef_p, om + w)
    re = 1.0 + (2.0 / np.pi) * (lin + logs.sum(axis=-1))
    im = imag_part(model)(np.abs(omega))
    return re + 1j * im


def eval_chi(model: ResponseModel, omega) -> complex | np.ndarray:
    """Value of eps (or mu) at complex frequency ``omega`` with Im(omega) >= 0."""
    omega = np.asarray(omega, dtype=complex)
    if np.any(omega.imag < 0):
        raise DomainError("response functions are evaluated only in the closed upper half plane")
    if model.kind is Kind.VACUUM:
        out = np.ones_like(omega)
    elif model.kind is Kind.LORENTZ_SUM:
        out = np.ones_like(omega)
        for t in model.terms:
            out = out + t.signed_strength / (t.omega_0 ** 2 - omega * omega - 1j * t.gamma * omega)
    else:
        if np.any(omega.imag != 0):
            raise UnsupportedEvaluationError(
                "tabulated models are evaluated on the real axis only; use eval_imag_axis")
        re_om = omega.real
        out = _tabulated_real_axis(model, re_om)
        out = np.where(re_om < 0, np.conj(out), out)
    return complex(out) if out.ndim == 0 else out


def _imag_axis_raw(model: ResponseModel, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if model.kind is Kind.VACUUM:
        return np.ones_like(w)
    if model.kind is Kind.LORENTZ_SUM:
        out = np.ones_like(w)
        for t in model.terms:
            out = out + t.signed_strength / (t.omega_0 ** 2 + w * w + t.gamma * w)
        return out
    # Exact transform of the piecewise-linear imaginary part.
    om, _, b, a = _segments(model)
    ww = w[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        def anti(x):
            at = np.where(ww > 0, ww * np.arctan(x / np.where(ww > 0, ww, 1.0)), 0.0)
            return b * x + 0.5 * xlogy(a, x * x + ww * ww) - b * at
        total = (anti(om[1:]) - anti(om[:-1])).sum(axis=-1)
    return 1.0 + (2.0 / np.pi) * total


def eval_imag_axis(model: ResponseModel, w):
    """Real value of the model at imaginary frequency i*w, w >= 0."""
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr < 0):
        raise DomainError("imaginary-axis frequency must be nonnegative")
    out = _imag_axis_raw(model, w_arr)
    if np.any(~(out > 0)):
        raise InvalidMediumError("response is nonpositive on the imaginary axis")
    return float(out) if out.ndim == 0 else out


def refractive_index_imag(eps: ResponseModel, mu: ResponseModel, w):
    """n(iw) = sqrt(eps(iw) mu(iw)), positive root."""
    return np.sqrt(eval_imag_axis(eps, w) * eval_imag_axis(mu, w))


def n_static(eps: ResponseModel, mu: ResponseModel) -> float:
    return float(refractive_index_imag(eps, mu, 0.0))


def kk_imag_axis(im_part: Callable[[np.ndarray], np.ndarray], w: float,
                 quad: QuadratureSpec = QuadratureSpec(),
                 points: Sequence[float] | None = None) -> float:
    """1 + (2/pi) * int_0^inf xi im_part(xi) / (w^2 + xi^2) dxi.

    ``points`` marks narrow features of ``im_part`` (resonances) so the
    adaptive rule cannot step over them.
    """
    if w < 0:
        raise DomainError("w must be nonnegative")

    def integrand(xi):
        return xi * im_part(xi) / (w * w + xi * xi)

    pts = [p for p in (points or ()) if p > 0 and np.isfinite(p)]
    if pts:
        # Resolve the features on a finite interval in the original variable,
        # where closely spaced breakpoints stay distinct, then add the tail.
        cut = 2.0 * max(pts)
        head = integrate_interval(integrand, 0.0, cut, quad, points=pts)
        tail = integrate_semi_inf(lambda y: integrand(cut + y), quad, scale=max(cut, w))
        value = head.value + tail.value
        error = head.error_estimate + tail.error_estimate
        converged = head.converged and tail.converged
    else:
        est = integrate_semi_inf(integrand, quad, scale=max(w, 1.0))
        value, error, converged = est.value, est.error_estimate, est.converged
    if not converged:
        raise AccuracyError("Kramers-Kronig integral did not converge",
                            estimate=1.0 + 2.0 / np.pi * value, error=error)
    return 1.0 + (2.0 / np.pi) * value


def kk_model(model: ResponseModel, w: float, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """kk_imag_axis applied to a model's own imaginary part."""
    return kk_imag_axis(imag_part(model), w, quad, points=feature_points(model))


def coupling_functions(eps: ResponseModel, mu: ResponseModel, omega: float) -> tuple[float, float]:
    """Coupling amplitudes f = sqrt(2 w |Im eps| / pi), g = sqrt(2 w |Im 1/mu| / pi)."""
    if omega <= 0:
        raise DomainError("coupling functions are defined for omega > 0")
    e = eval_chi(eps, omega)
    m = eval_chi(mu, omega)
    f = np.sqrt(2 * omega * abs(e.imag) / np.pi)
    g = np.sqrt(2 * omega * abs((1.0 / m).imag) / np.pi)
    return float(f), float(g)


@dataclass
class ValidationReport:
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, bool(ok), detail))

    def failed(self) -> list[str]:
        return [name for name, ok, _ in self.checks if not ok]


def validate(model: ResponseModel) -> ValidationReport:
    """Run the admissibility checks on a response model.

    Zero-freeness in the upper half plane is only probed through its
    necessary condition, positivity on the imaginary axis.
    """
    rep = ValidationReport()
    # (a) field-level invariants are enforced at construction
    rep.add("fields", True, f"kind={model.kind.value}")

    bad = [t for t in model.terms if t.sign is Sign.GAIN and not t.omega_p < t.omega_0]
    rep.add("gain_omega_p_below_omega_0", not bad,
            "; ".join(f"omega_p={t.omega_p} >= omega_0={t.omega_0}" for t in bad))

    grid = np.logspace(-3, 3, 200)
    vals = _imag_axis_raw(model, grid)
    rep.add("positive_on_imag_axis", bool(np.all(vals > 0)), f"min={vals.min():.6g}")

    om = np.logspace(-2, 2, 20)
    forward = eval_chi(model, om)
    mirrored = eval_chi(model, -om)
    dev = float(np.max(np.abs(mirrored - np.conj(forward))))
    rep.add("schwarz_symmetry", dev <= 1e-12 * max(1.0, float(np.max(np.abs(forward)))),
            f"max_dev={dev:.3g}")

    static_dev = abs(float(_imag_axis_raw(model, 0.0)) - 1.0)
    high = abs(float(_imag_axis_raw(model, 1e3)) - 1.0)
    ok = high <= 1e-2 * static_dev if static_dev > 0 else high == 0.0
    rep.add("high_frequency_limit", ok, f"|chi(1e3 i)-1|={high:.3g}, static_dev={static_dev:.3g}")
    return rep


def classify(eps: ResponseModel, mu: ResponseModel,
             grid: tuple[float, float, int] = (1e-3, 1e3, 400),
             tol: float = 1e-12) -> MediumClass:
    """Sign pattern of Im eps and Im mu on a log-spaced real-frequency grid."""
    if eps.kind is Kind.VACUUM and mu.kind is Kind.VACUUM:
        return MediumClass.VACUUM
    om = np.logspace(np.log10(grid[0]), np.log10(grid[1]), int(grid[2]))
    vals = np.concatenate([imag_part(eps)(om), imag_part(mu)(om)])
    has_pos = bool(np.any(vals > tol))
    has_neg = bool(np.any(vals < -tol))
    if has_pos and has_neg:
        return MediumClass.MIXED
    if has_neg:
        return MediumClass.FULLY_AMPLIFYING
    if has_pos:
        return MediumClass.PASSIVE
    return MediumClass.VACUUM
