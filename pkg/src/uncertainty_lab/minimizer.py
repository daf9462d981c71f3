"""Minimizing sequences of the lattice uncertainty relations.

The main relation is minimized by the separable sequence

    omega_k = prod_j I_{k_j}(z) / I_0(z),    z = 1 / (alpha h^2)

and the second (one-dimensional) relation by omega_k = i^{-k} I_k(1/(alpha h)) / I_0.
Both are built from Bessel ratios, so they stay finite for any mesh size.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import reduce

import numpy as np
from scipy import integrate

from .bessel import QUADRATURE_PANELS, BesselArg, bessel_i_family_scaled, bessel_i_ratios
from .errors import (
    DegenerateNormalizationError,
    InvalidArgumentError,
    TruncationError,
    UnsupportedDimensionError,
)
from .lattice import (
    MAX_DIMENSION,
    TAIL_TOL,
    LatticeSeq,
    index_grids,
    normalization_quantity,
    second_normalization_quantity,
    tail_bound,
    truncation_radius,
)

logger = logging.getLogger("uncertainty_lab")

# Exact-integer snapping window for the lattice index of a convergence point
_INDEX_SNAP = 1e-9


class NormMode(str, Enum):
    """How a minimizer is scaled."""

    CENTER_ONE = "center-one"
    UNIT_L2 = "unit-l2"
    COMMUTATOR2 = "commutator2"


@dataclass(frozen=True)
class MinimizerSpec:
    """Parameters selecting a minimizer family."""

    alpha: float = 1.0
    h: float = 1.0
    d: int = 1
    norm_mode: NormMode = NormMode.CENTER_ONE

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha) or self.alpha <= 0:
            raise InvalidArgumentError(f"alpha must be positive, got {self.alpha}")
        if not math.isfinite(self.h) or self.h <= 0:
            raise InvalidArgumentError(f"Mesh size h must be positive, got {self.h}")
        if self.d not in range(1, MAX_DIMENSION + 1):
            raise InvalidArgumentError(f"Dimension must be 1..{MAX_DIMENSION}, got {self.d}")
        try:
            object.__setattr__(self, "norm_mode", NormMode(self.norm_mode))
        except ValueError as e:
            raise InvalidArgumentError(f"Unknown normalization mode: {self.norm_mode!r}") from e

    @property
    def z(self) -> float:
        """Bessel argument 1/(alpha h^2) of the main minimizer."""
        return 1.0 / (self.alpha * self.h**2)

    @property
    def z_second(self) -> float:
        """Bessel argument 1/(alpha h) of the second-relation minimizer."""
        return 1.0 / (self.alpha * self.h)


@dataclass
class ConvergencePoint:
    """f_j(x) against the Gaussian exp(-|x|^2/2) at one point."""

    x: tuple[float, ...]
    j: int
    f_j_value: float
    gauss_value: float
    error: float = field(init=False)
    indices: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        self.error = abs(self.f_j_value - self.gauss_value)


@dataclass
class ConvergenceSummary:
    """Sup error of f_j over a grid."""

    j: int
    sup_error: float
    worst_x: tuple[float, ...]


# -----------------------------------------------------------------------------
# Normalization
# -----------------------------------------------------------------------------


def norm_mode_factor(u: LatticeSeq, mode: NormMode, second: bool = False) -> float:
    """Scalar that brings a center-one sequence to the requested normalization.

    Args:
        u: Sequence with u_0 = 1.
        mode: Target normalization.
        second: Normalize the second-relation quantity instead of the main one.

    Raises:
        DegenerateNormalizationError: If the quantity to normalize vanishes.
    """
    mode = NormMode(mode)
    if mode is NormMode.CENTER_ONE:
        return 1.0
    if mode is NormMode.UNIT_L2:
        size = u.norm()
    else:
        size = abs(second_normalization_quantity(u)) if second else abs(normalization_quantity(u))
        size = math.sqrt(size / 2.0)
    if size == 0.0:
        raise DegenerateNormalizationError(f"Cannot apply {mode.value}: quantity is zero")
    return 1.0 / size


def apply_norm_mode(u: LatticeSeq, mode: NormMode, second: bool = False) -> LatticeSeq:
    """Scale u to the given normalization (see `norm_mode_factor`)."""
    factor = norm_mode_factor(u, mode, second=second)
    return u if factor == 1.0 else u.scaled(factor)


# -----------------------------------------------------------------------------
# Construction
# -----------------------------------------------------------------------------


def _check_radius(z: float, N: int | None, d: int, strict: bool) -> int:
    if N is None:
        N = truncation_radius(z, d)
        logger.debug("Minimizer truncation radius for z=%g, d=%d: %d", z, d, N)
        return N
    if N < 1:
        raise InvalidArgumentError(f"Box radius must be positive, got {N}")
    tail = tail_bound(z, N, d)
    if tail > TAIL_TOL:
        message = f"Box radius {N} leaves relative tail {tail:.3e} > {TAIL_TOL:g} (z={z:g})"
        if strict:
            raise TruncationError(message)
        logger.warning(message)
    return N


def _product_sequence(profile: np.ndarray, d: int, N: int, h: float) -> LatticeSeq:
    """u_k = prod_j profile[|k_j|]."""
    factors = [profile[np.abs(g)] for g in index_grids(d, N)]
    return LatticeSeq(d, N, h, reduce(np.multiply, factors))


def minimizer_main(
    spec: MinimizerSpec, N: int | None = None, strict: bool = True
) -> LatticeSeq:
    """The minimizer of the main relation on the box of radius N.

    Args:
        spec: Minimizer parameters.
        N: Box radius; chosen from the tail bound when omitted.
        strict: Raise instead of warning when the tail bound exceeds TAIL_TOL.

    Raises:
        TruncationError: If N is too small and strict is set.
    """
    N = _check_radius(spec.z, N, spec.d, strict)
    ratios = bessel_i_ratios(N, spec.z).values.real
    seq = _product_sequence(ratios, spec.d, N, spec.h)
    return apply_norm_mode(seq, spec.norm_mode)


# Phase i^{-k} indexed by k mod 4
_INVERSE_I_POWERS = np.array([1.0, -1j, -1.0, 1j])


def minimizer_second(
    spec: MinimizerSpec, N: int | None = None, strict: bool = True
) -> LatticeSeq:
    """The minimizer omega_k = i^{-k} I_k(1/(alpha h)) / I_0 of the second relation.

    Raises:
        UnsupportedDimensionError: If spec.d != 1.
        TruncationError: If N is too small and strict is set.
    """
    if spec.d != 1:
        raise UnsupportedDimensionError("The second relation is defined for d = 1 only")
    N = _check_radius(spec.z_second, N, 1, strict)
    ratios = bessel_i_ratios(N, spec.z_second).values.real
    k = np.arange(-N, N + 1)
    values = _INVERSE_I_POWERS[k % 4] * ratios[np.abs(k)]
    seq = LatticeSeq(1, N, spec.h, values)
    return apply_norm_mode(seq, spec.norm_mode, second=True)


def minimizer_at_time(spec: MinimizerSpec, N: int, t: float) -> LatticeSeq:
    """Closed-form Schrodinger evolution of the main minimizer.

    omega_k(t) = exp(-2dit/h^2) C prod_j I_{k_j}(z + 2it/h^2), evaluated on the
    box of radius N. C is the constant of `spec.norm_mode` at t = 0.
    """
    if not math.isfinite(t):
        raise InvalidArgumentError(f"Time must be finite, got {t!r}")
    z = spec.z
    z_t = complex(z, 2.0 * t / spec.h**2)

    # Both scaled families carry exp(-z), so their quotient is the plain ratio
    moving = bessel_i_family_scaled(BesselArg(z_t, N))
    at_rest = bessel_i_family_scaled(BesselArg(z, 0))[0].real
    profile = moving / at_rest

    factors = [profile[np.abs(g)] for g in index_grids(spec.d, N)]
    phase = np.exp(-2j * spec.d * t / spec.h**2)
    values = phase * reduce(np.multiply, factors)

    factor = 1.0
    if spec.norm_mode is not NormMode.CENTER_ONE:
        center_one = minimizer_main(replace(spec, norm_mode=NormMode.CENTER_ONE))
        factor = norm_mode_factor(center_one, spec.norm_mode)
    return LatticeSeq(spec.d, N, spec.h, values * factor)


# -----------------------------------------------------------------------------
# Recurrence checks
# -----------------------------------------------------------------------------


def _interior(values: np.ndarray, axis: int, offset: int) -> np.ndarray:
    index = [slice(None)] * values.ndim
    index[axis] = slice(1 + offset, values.shape[axis] - 1 + offset)
    return values[tuple(index)]


def recurrence_residual_main(omega: LatticeSeq, alpha: float) -> float:
    """sup |alpha k_j h omega_k + (omega_{k+e_j} - omega_{k-e_j})/2h| / sup |omega|.

    Taken over every axis and every node that is interior along that axis.
    """
    if omega.N < 1:
        return 0.0
    scale = float(np.max(np.abs(omega.values)))
    if scale == 0.0:
        return 0.0
    worst = 0.0
    for j, grid in enumerate(omega.index_grids()):
        centre = _interior(omega.values, j, 0)
        k = _interior(grid, j, 0)
        difference = (_interior(omega.values, j, 1) - _interior(omega.values, j, -1)) / (2 * omega.h)
        residual = alpha * k * omega.h * centre + difference
        worst = max(worst, float(np.max(np.abs(residual))))
    return worst / scale


def recurrence_residual_second(omega: LatticeSeq, alpha: float) -> float:
    """sup |alpha k h omega_k + i(omega_{k+1} + omega_{k-1})/2| / sup |omega|."""
    if omega.d != 1:
        raise UnsupportedDimensionError("The second relation is defined for d = 1 only")
    scale = float(np.max(np.abs(omega.values)))
    if omega.N < 1 or scale == 0.0:
        return 0.0
    v = omega.values
    k = omega.axis()[1:-1]
    residual = alpha * k * omega.h * v[1:-1] + 1j * (v[2:] + v[:-2]) / 2
    return float(np.max(np.abs(residual))) / scale


# -----------------------------------------------------------------------------
# Convergence to the Gaussian
# -----------------------------------------------------------------------------


def _lattice_index(value: float) -> int:
    """ceil for positive values, floor for negative ones, exact near integers."""
    nearest = round(value)
    if abs(value - nearest) <= _INDEX_SNAP * max(1.0, abs(value)):
        return int(nearest)
    return math.ceil(value) if value >= 0 else math.floor(value)


def gaussian_convergence(x: Sequence[float], j: int) -> ConvergencePoint:
    """Evaluate f_j(x) = prod_m I_{k_m}(1/h_j^2) / I_0(1/h_j^2) with h_j = max|x_i| / j.

    k_m is x_m / h_j rounded away from zero; f_j(0) = 1.
    """
    point = tuple(float(v) for v in x)
    if not point or not all(math.isfinite(v) for v in point):
        raise InvalidArgumentError(f"Point must be a nonempty finite vector, got {x!r}")
    if j < 1:
        raise InvalidArgumentError(f"j must be a positive integer, got {j}")

    gauss = math.exp(-sum(v * v for v in point) / 2)
    largest = max(abs(v) for v in point)
    if largest == 0.0:
        return ConvergencePoint(point, j, 1.0, gauss, indices=(0,) * len(point))

    h_j = largest / j
    indices = tuple(_lattice_index(v * j / largest) for v in point)
    ratios = bessel_i_ratios(max(abs(k) for k in indices), 1.0 / h_j**2).values.real
    value = math.prod(float(ratios[abs(k)]) for k in indices)
    return ConvergencePoint(point, j, value, gauss, indices=indices)


def gaussian_sweep(
    j_list: Sequence[int], grid: Sequence[float], d: int = 1
) -> list[ConvergenceSummary]:
    """Sup error of f_j over grid^d for each j."""
    points = list(np.array(np.meshgrid(*([list(grid)] * d), indexing="ij")).reshape(d, -1).T)
    summaries = []
    for j in j_list:
        results = [gaussian_convergence(p, j) for p in points]
        worst = max(results, key=lambda r: r.error)
        summaries.append(ConvergenceSummary(j=j, sup_error=worst.error, worst_x=worst.x))
    return summaries


# -----------------------------------------------------------------------------
# Periodic picture
# -----------------------------------------------------------------------------


def _scaled_i0(z: float) -> float:
    return float(bessel_i_family_scaled(BesselArg(z, 0))[0].real)


def unit_l2_constant(spec: MinimizerSpec, panels: int = QUADRATURE_PANELS) -> float:
    """C with || C prod_j exp(z (cos(x_j h) - 1)) ||_{L^2(cell)} = 1.

    The cell is [-pi/h, pi/h]^d; the one-dimensional integral is done by Simpson.
    """
    x = np.linspace(-math.pi / spec.h, math.pi / spec.h, panels + 1)
    integral = integrate.simpson(np.exp(2 * spec.z * (np.cos(x * spec.h) - 1)), x=x)
    return float(integral) ** (-spec.d / 2)


def _profile_constant(spec: MinimizerSpec) -> float:
    if spec.norm_mode is NormMode.UNIT_L2:
        return unit_l2_constant(spec)
    center_one = (spec.h / (2 * math.pi) / _scaled_i0(spec.z)) ** spec.d
    if spec.norm_mode is NormMode.CENTER_ONE:
        return center_one
    sequence = minimizer_main(replace(spec, norm_mode=NormMode.CENTER_ONE))
    return center_one * norm_mode_factor(sequence, NormMode.COMMUTATOR2)


def periodic_profile(spec: MinimizerSpec, x: Sequence[float]) -> float:
    """f(x) = C exp(sum_j cos(x_j h) / (alpha h^2)) on the cell [-pi/h, pi/h]^d.

    The minimizer values are the Fourier coefficients
    omega_k = int_cell f(x) exp(-i k.x h) dx. C follows spec.norm_mode and is
    applied in the form C exp(z sum_j (cos(x_j h) - 1)) so that nothing overflows.
    """
    point = np.asarray(x, dtype=float).reshape(-1)
    if point.size != spec.d:
        raise InvalidArgumentError(f"Point has {point.size} coordinates, expected {spec.d}")
    if np.any(np.abs(point) > math.pi / spec.h * (1 + 1e-12)):
        raise InvalidArgumentError(f"Point {tuple(point)} is outside the cell [-pi/h, pi/h]^d")
    exponent = spec.z * float(np.sum(np.cos(point * spec.h) - 1))
    return _profile_constant(spec) * math.exp(exponent)


def profile_fourier_coefficient(
    spec: MinimizerSpec, k: Sequence[int] | int, panels: int = QUADRATURE_PANELS
) -> float:
    """Simpson value of int_cell f(x) exp(-i k.x h) dx.

    The profile is separable and even, so the integral is a product of
    one-dimensional cosine integrals.
    """
    index = (k,) if isinstance(k, (int, np.integer)) else tuple(k)
    if len(index) != spec.d:
        raise InvalidArgumentError(f"Index {index} has the wrong dimension")
    x = np.linspace(-math.pi / spec.h, math.pi / spec.h, panels + 1)
    shape = np.exp(spec.z * (np.cos(x * spec.h) - 1))
    total = _profile_constant(spec)
    for kj in index:
        total *= float(integrate.simpson(shape * np.cos(kj * x * spec.h), x=x))
    return total
