"""Planar layered geometry on the imaginary frequency axis.

Layers are indexed 0..N-1 from left to right. Without mirrors the two
outer layers extend to infinity (their thickness then only locates the
conductor planes used by the Green-function boundary matrices). With
mirrors, perfect conductors sit at z = 0 and z = sum(d); in the scalar
convention used here they reflect with -1 for TE and +1 for TM.

Every quantity is real on the imaginary axis. Mode fields ``q`` and ``w``
may be numpy arrays of a common shape; all functions broadcast.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidMediumError, RoundTripGainError
from .response import ResponseModel, VACUUM, eval_imag_axis


class Polarization(str, enum.Enum):
    TE = "TE"
    TM = "TM"


MIRROR_REFLECTION = {Polarization.TE: -1.0, Polarization.TM: 1.0}


class Side(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class Layer:
    eps: ResponseModel = VACUUM
    mu: ResponseModel = VACUUM
    thickness: float = 1.0

    def __post_init__(self):
        if not self.thickness > 0:
            raise DomainError(f"layer thickness must be positive, got {self.thickness}")

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.thickness))

    def with_thickness(self, d: float) -> "Layer":
        return Layer(self.eps, self.mu, d)


@dataclass(frozen=True)
class Stack:
    layers: tuple[Layer, ...]
    mirrors: bool = False

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        n = len(self.layers)
        if n < 1:
            raise DomainError("a stack needs at least one layer")
        for i, layer in enumerate(self.layers):
            if not layer.finite and (self.mirrors or 0 < i < n - 1):
                raise DomainError(f"layer {i}: infinite thickness only allowed on outer layers without mirrors")

    def __len__(self) -> int:
        return len(self.layers)

    def with_thickness(self, j: int, d: float) -> "Stack":
        layers = list(self.layers)
        layers[j] = layers[j].with_thickness(d)
        return Stack(tuple(layers), self.mirrors)

    @property
    def total_thickness(self) -> float:
        return float(sum(layer.thickness for layer in self.layers))

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Left and right edge of every layer.

        The origin is the left edge of layer 0 when that layer is finite,
        otherwise the first interface.
        """
        d = np.array([layer.thickness for layer in self.layers], dtype=float)
        left = np.empty(len(d))
        right = np.empty(len(d))
        left[0] = 0.0 if np.isfinite(d[0]) else -np.inf
        right[0] = d[0] if np.isfinite(d[0]) else 0.0
        for i in range(1, len(d)):
            left[i] = right[i - 1]
            right[i] = right[i - 1] + d[i]
        if not self.mirrors:
            left[0] = -np.inf
            right[-1] = np.inf
        return left, right

    def interfaces(self) -> np.ndarray:
        return self.edges()[1][:-1]

    def conductor_positions(self) -> tuple[float, float]:
        if not all(layer.finite for layer in self.layers):
            raise DomainError("conductor positions need finite outer layers")
        return 0.0, self.total_thickness

    def locate(self, z: float) -> int:
        """Index of the layer containing ``z`` (left layer at an interface)."""
        if self.mirrors and not (0.0 <= z <= self.total_thickness):
            raise DomainError(f"z={z} lies outside the mirrored stack [0, {self.total_thickness}]")
        return int(np.searchsorted(self.interfaces(), z, side="left"))


@dataclass(frozen=True)
class TransverseMode:
    sigma: Polarization
    q: float | np.ndarray
    w: float | np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sigma", Polarization(self.sigma))
        q = np.asarray(self.q, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if np.any(q < 0) or np.any(w < 0):
            raise DomainError("q and w must be nonnegative")
        if np.any((q == 0) & (w == 0)):
            raise DomainError("q and w cannot both vanish")


def _response_pair(layer: Layer, w):
    try:
        return eval_imag_axis(layer.eps, w), eval_imag_axis(layer.mu, w)
    except InvalidMediumError as exc:
        raise InvalidMediumError(f"{exc} (w={w})") from None


def q_long(layer: Layer, mode: TransverseMode):
    """Q = sqrt(q^2 + w^2 eps(iw) mu(iw)), the evanescent decay rate."""
    eps, mu = _response_pair(layer, mode.w)
    return np.sqrt(np.asarray(mode.q) ** 2 + np.asarray(mode.w) ** 2 * eps * mu)


def _weight(layer: Layer, mode: TransverseMode):
    """mu for TE and eps for TM: the inverse of the derivative coefficient."""
    eps, mu = _response_pair(layer, mode.w)
    return mu if mode.sigma is Polarization.TE else eps


def _admittance(layer: Layer, mode: TransverseMode):
    return q_long(layer, mode) / _weight(layer, mode)


def _interface(y_from, y_to):
    return (y_from - y_to) / (y_from + y_to)


def r_interface(src: Layer, dst: Layer, mode: TransverseMode):
    """Single-interface reflection seen from ``src`` toward ``dst``.

    TE: (mu_to/Q_to - mu_from/Q_from) / (mu_to/Q_to + mu_from/Q_from),
    TM: the same with eps in place of mu.
    """
    return _interface(_admittance(src, mode), _admittance(dst, mode))


def _propagators(Q: list, layers: Sequence[Layer]) -> list:
    """exp(-2 Q_j d_j), flushed to zero below 1e-300."""
    out = []
    for Qj, layer in zip(Q, layers):
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            e = np.exp(-2.0 * Qj * layer.thickness) if layer.finite else np.zeros_like(Qj)
        out.append(np.where(e < 1e-300, 0.0, e))
    return out


@dataclass
class StackModeData:
    """Per-layer quantities of one stack at one (possibly vectorized) mode."""

    Q: list
    weight: list
    prop: list
    r_plus: list
    r_minus: list


def mode_data(stack: Stack, mode: TransverseMode) -> StackModeData:
    layers = stack.layers
    n = len(layers)
    Q = [q_long(layer, mode) for layer in layers]
    wt = [_weight(layer, mode) for layer in layers]
    Y = [Qj / wj for Qj, wj in zip(Q, wt)]
    prop = _propagators(Q, layers)
    end = MIRROR_REFLECTION[mode.sigma] if stack.mirrors else 0.0
    shape = np.shape(Q[0])
    r_plus = [None] * n
    r_minus = [None] * n
    r_plus[-1] = np.full(shape, end)
    r_minus[0] = np.full(shape, end)
    for k in range(n - 2, -1, -1):
        ri = _interface(Y[k], Y[k + 1])
        far = r_plus[k + 1] * prop[k + 1] if (stack.mirrors or k + 1 < n - 1) else 0.0
        r_plus[k] = (ri + far) / (1.0 + ri * far)
    for k in range(1, n):
        ri = _interface(Y[k], Y[k - 1])
        far = r_minus[k - 1] * prop[k - 1] if (stack.mirrors or k - 1 > 0) else 0.0
        r_minus[k] = (ri + far) / (1.0 + ri * far)
    return StackModeData(Q, wt, prop, r_plus, r_minus)


def _check_index(stack: Stack, j: int) -> None:
    if not 0 <= j < len(stack):
        raise DomainError(f"layer index {j} out of range for {len(stack)} layers")


def r_recursive(stack: Stack, j: int, side: Side | str, mode: TransverseMode):
    """Generalized reflection seen from inside layer ``j`` toward ``side``,
    referenced at that boundary of layer ``j``."""
    _check_index(stack, j)
    data = mode_data(stack, mode)
    r = data.r_plus[j] if Side(side) is Side.PLUS else data.r_minus[j]
    return float(r) if np.ndim(r) == 0 else r


def d_factor(stack: Stack, j: int, mode: TransverseMode):
    """Multiple-reflection denominator 1 - r_minus r_plus exp(-2 Q_j d_j)."""
    _check_index(stack, j)
    data = mode_data(stack, mode)
    e = data.prop[j] if (stack.mirrors or 0 < j < len(stack) - 1) else 0.0
    D = 1.0 - data.r_minus[j] * data.r_plus[j] * e
    if np.any(D <= 0):
        raise RoundTripGainError(f"round-trip factor of layer {j} is nonpositive",
                                 sigma=mode.sigma, q=mode.q, w=mode.w)
    return float(D) if np.ndim(D) == 0 else D


def r_composed(stack: Stack, i: int, j: int, k: int, mode: TransverseMode):
    """Two-interface reflection r_{i/j/k} from layer ``i`` across layer ``j``.

    Uses the bare interface coefficient r_{i/j} and the generalized
    reflection r_{j/k} of everything beyond ``k``. For this scalar
    convention t_{i/j} t_{j/i} = 1 - r_{i/j}^2 and r_{j/i} = -r_{i/j}.
    """
    for idx in (i, j, k):
        _check_index(stack, idx)
    if abs(i - j) != 1 or abs(k - j) != 1 or i == k:
        raise DomainError("i and k must be the two neighbours of j")
    layers = stack.layers
    r_ij = r_interface(layers[i], layers[j], mode)
    r_ji = -r_ij
    data = mode_data(stack, mode)
    r_jk = data.r_plus[j] if k > j else data.r_minus[j]
    e = data.prop[j]
    D = 1.0 - r_ji * r_jk * e
    if np.any(D <= 0):
        raise RoundTripGainError(f"round-trip factor of layer {j} is nonpositive",
                                 sigma=mode.sigma, q=mode.q, w=mode.w)
    tt = 1.0 - r_ij * r_ij
    val = (r_ij + (tt - r_ij * r_ji) * r_jk * e) / D
    return float(val) if np.ndim(val) == 0 else val


def r_transfer_oracle(stack: Stack, j: int, side: Side | str, mode: TransverseMode) -> float:
    """Reflection coefficient from an explicit 2x2 matching-matrix product.

    Independent of the recursion: the field in layer k is written as
    A exp(-Q (z - a)) + B exp(Q (z - a)), continuity of the field and of
    its flux (derivative divided by mu or eps) is imposed at each
    interface, and the ratio B/A is read off at the requested boundary.
    Scalar modes only.
    """
    _check_index(stack, j)
    side = Side(side)
    layers = list(stack.layers)
    if side is Side.MINUS:
        layers = layers[::-1]
        j = len(layers) - 1 - j
    n = len(layers)
    Q = [float(q_long(layer, mode)) for layer in layers]
    wt = [float(_weight(layer, mode)) for layer in layers]
    # Amplitudes (A, B) at the right boundary of the last layer.
    if stack.mirrors:
        vec = np.array([1.0, MIRROR_REFLECTION[mode.sigma]])
    else:
        vec = np.array([1.0, 0.0])
    for k in range(n - 1, j, -1):
        if stack.mirrors or k < n - 1:
            d = layers[k].thickness
            # Move the reference point from the right to the left boundary.
            vec = np.array([vec[0] * np.exp(Q[k] * d), vec[1] * np.exp(-Q[k] * d)])
            vec = vec / np.max(np.abs(vec))
        # Match layer k-1 (left, at its right boundary) to layer k (at its left boundary).
        M_left = np.array([[1.0, 1.0], [-Q[k - 1] / wt[k - 1], Q[k - 1] / wt[k - 1]]])
        M_right = np.array([[1.0, 1.0], [-Q[k] / wt[k], Q[k] / wt[k]]])
        if abs(np.linalg.det(M_left)) < 1e-300:
            raise np.linalg.LinAlgError("singular interface matrix")
        vec = np.linalg.solve(M_left, M_right @ vec)
    if vec[0] == 0:
        raise np.linalg.LinAlgError("incident amplitude vanished")
    return float(vec[1] / vec[0])
