"""Finitely supported sequences on Z^d and the discrete uncertainty inequalities.

A `LatticeSeq` stores u_k for k in the box [-N, N]^d with mesh h; every index
off the box reads 0. Norms and inner products carry the weight h^d:

    <u, v> = h^d sum_k u_k conj(v_k)

The difference operators enlarge the support by one site in each direction,
so `op_momentum` and `op_laplacian` return sequences on the box of radius N+1.
That keeps the adjoint identities exact instead of approximately true.
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from .bessel import bessel_i_ratios
from .errors import (
    DegenerateInputError,
    InvalidArgumentError,
    UnsupportedDimensionError,
)

logger = logging.getLogger("uncertainty_lab")

MAX_DIMENSION = 3

# Ratio window around 1 that counts as equality in an uncertainty inequality
EQUALITY_TOL = 1e-9

# Relative l2 mass allowed outside a truncation box
TAIL_TOL = 1e-13


# -----------------------------------------------------------------------------
# Sequences
# -----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LatticeSeq:
    """Complex sequence on the box [-N, N]^d of Z^d with mesh h."""

    d: int
    N: int
    h: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.d not in range(1, MAX_DIMENSION + 1):
            raise InvalidArgumentError(f"Dimension must be 1..{MAX_DIMENSION}, got {self.d}")
        if int(self.N) != self.N or self.N < 0:
            raise InvalidArgumentError(f"Box radius must be a nonnegative integer, got {self.N}")
        if not math.isfinite(self.h) or self.h <= 0:
            raise InvalidArgumentError(f"Mesh size h must be positive, got {self.h}")

        values = np.array(self.values, dtype=complex)
        expected = (2 * int(self.N) + 1,) * self.d
        if values.shape != expected:
            raise InvalidArgumentError(f"Values have shape {values.shape}, expected {expected}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("Sequence values must be finite")
        values.setflags(write=False)

        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "values", values)

    # -------------------------------------------------------------------------
    # Constructors
    # -------------------------------------------------------------------------

    @classmethod
    def zeros(cls, d: int, N: int, h: float) -> "LatticeSeq":
        """The zero sequence on the box of radius N."""
        return cls(d, N, h, np.zeros((2 * N + 1,) * d, dtype=complex))

    @classmethod
    def delta(cls, d: int, N: int, h: float, k: Sequence[int] | None = None) -> "LatticeSeq":
        """The unit sequence at index k (default: the origin)."""
        k = tuple(k) if k is not None else (0,) * d
        if len(k) != d or any(abs(kj) > N for kj in k):
            raise InvalidArgumentError(f"Index {k} is not in the box of radius {N}")
        values = np.zeros((2 * N + 1,) * d, dtype=complex)
        values[tuple(kj + N for kj in k)] = 1.0
        return cls(d, N, h, values)

    @classmethod
    def from_values(cls, values: Any, h: float) -> "LatticeSeq":
        """Wrap an array of odd side length 2N+1, centered at k = 0."""
        array = np.asarray(values, dtype=complex)
        side = array.shape[0] if array.ndim else 0
        if array.ndim == 0 or side % 2 == 0 or any(s != side for s in array.shape):
            raise InvalidArgumentError(f"Cannot center an array of shape {array.shape}")
        return cls(array.ndim, (side - 1) // 2, h, array)

    @classmethod
    def from_function(
        cls,
        fn: Callable[..., Any],
        d: int,
        N: int,
        h: float,
    ) -> "LatticeSeq":
        """Build u_k = fn(k_1, ..., k_d) from integer index grids."""
        grids = index_grids(d, N)
        return cls(d, N, h, np.broadcast_to(fn(*grids), (2 * N + 1,) * d))

    # -------------------------------------------------------------------------
    # Access
    # -------------------------------------------------------------------------

    def __getitem__(self, k: int | Sequence[int]) -> complex:
        index = (k,) if isinstance(k, (int, np.integer)) else tuple(k)
        if len(index) != self.d:
            raise InvalidArgumentError(f"Index {index} has the wrong dimension")
        if any(abs(kj) > self.N for kj in index):
            return 0j
        return complex(self.values[tuple(kj + self.N for kj in index)])

    def axis(self) -> np.ndarray:
        """Integer indices -N..N along one axis."""
        return np.arange(-self.N, self.N + 1)

    def index_grids(self) -> tuple[np.ndarray, ...]:
        """Integer index grids k_1..k_d over the box."""
        return index_grids(self.d, self.N)

    def with_values(self, values: np.ndarray) -> "LatticeSeq":
        """Same box and mesh, new values."""
        return LatticeSeq(self.d, self.N, self.h, values)

    def scaled(self, factor: complex) -> "LatticeSeq":
        return self.with_values(self.values * factor)

    def embed(self, N: int) -> "LatticeSeq":
        """Zero-pad to the box of radius N >= self.N."""
        if N < self.N:
            raise InvalidArgumentError(f"Cannot embed radius {self.N} into radius {N}")
        if N == self.N:
            return self
        return LatticeSeq(self.d, N, self.h, np.pad(self.values, N - self.N))

    def crop(self, N: int) -> "LatticeSeq":
        """Restrict to the box of radius N <= self.N (values outside are dropped)."""
        if N > self.N:
            return self.embed(N)
        cut = self.N - N
        index = tuple(slice(cut, 2 * self.N + 1 - cut) for _ in range(self.d))
        return LatticeSeq(self.d, N, self.h, self.values[index])

    # -------------------------------------------------------------------------
    # Norms
    # -------------------------------------------------------------------------

    def norm_squared(self) -> float:
        """h^d sum |u_k|^2."""
        return float(self.h**self.d * np.sum(np.abs(self.values) ** 2))

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def inner(self, other: "LatticeSeq") -> complex:
        return inner_product(self, other)

    # -------------------------------------------------------------------------
    # Serialization
    # -------------------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        """Plain dict {d, N, h, re[], im[]} in row-major k-order."""
        flat = self.values.reshape(-1)
        return {
            "d": self.d,
            "N": self.N,
            "h": self.h,
            "re": [float(x) for x in flat.real],
            "im": [float(x) for x in flat.imag],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LatticeSeq":
        """Inverse of `to_dict`."""
        try:
            d, N, h = int(data["d"]), int(data["N"]), float(data["h"])
            real = np.asarray(data["re"], dtype=float)
            imag = np.asarray(data.get("im", np.zeros_like(real)), dtype=float)
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidArgumentError(f"Malformed sequence data: {e}") from e
        size = (2 * N + 1) ** d
        if real.size != size or imag.size != size:
            raise InvalidArgumentError(f"Expected {size} values for d={d}, N={N}")
        return cls(d, N, h, (real + 1j * imag).reshape((2 * N + 1,) * d))


def index_grids(d: int, N: int) -> tuple[np.ndarray, ...]:
    """Integer index grids over [-N, N]^d in 'ij' order."""
    axis = np.arange(-N, N + 1)
    return tuple(np.meshgrid(*([axis] * d), indexing="ij"))


def _common_box(u: LatticeSeq, v: LatticeSeq) -> tuple[LatticeSeq, LatticeSeq]:
    if u.d != v.d:
        raise InvalidArgumentError(f"Dimension mismatch: {u.d} vs {v.d}")
    if not math.isclose(u.h, v.h, rel_tol=1e-15):
        raise InvalidArgumentError(f"Mesh mismatch: {u.h} vs {v.h}")
    N = max(u.N, v.N)
    return u.embed(N), v.embed(N)


def inner_product(u: LatticeSeq, v: LatticeSeq) -> complex:
    """h^d sum_k u_k conj(v_k) over the union of both boxes."""
    u, v = _common_box(u, v)
    return complex(u.h**u.d * np.vdot(v.values, u.values))


def vector_norm(components: Sequence[LatticeSeq]) -> float:
    """Norm of a vector-valued sequence, sqrt(sum_j ||u_j||^2)."""
    return math.sqrt(sum(c.norm_squared() for c in components))


def random_sequence(rng: np.random.Generator, d: int, N: int, h: float) -> LatticeSeq:
    """A generic test datum: Gaussian envelope times complex noise.

    The envelope keeps the nearest-neighbour correlation well away from zero,
    so the datum can always be normalized.
    """
    grids = index_grids(d, N)
    width = max(1.0, N / 3)
    envelope = np.exp(-sum(g.astype(float) ** 2 for g in grids) / (2 * width**2))
    shape = (2 * N + 1,) * d
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return LatticeSeq(d, N, h, envelope * (1.0 + 0.5 * noise))


# -----------------------------------------------------------------------------
# Operators
# -----------------------------------------------------------------------------


def _shifted(padded: np.ndarray, axis: int, step: int) -> np.ndarray:
    """View of a 2-padded array on the radius N+1 box, shifted by step along axis."""
    index = [slice(1, -1)] * padded.ndim
    index[axis] = slice(1 + step, padded.shape[axis] - 1 + step)
    return padded[tuple(index)]


def op_position(u: LatticeSeq) -> tuple[LatticeSeq, ...]:
    """(S_h u)_k = k h u_k, one component per axis."""
    return tuple(u.with_values(g * u.h * u.values) for g in u.index_grids())


def op_momentum(u: LatticeSeq) -> tuple[LatticeSeq, ...]:
    """(A_h u)_k = (u_{k+e_j} - u_{k-e_j}) / 2h, on the radius N+1 box."""
    padded = np.pad(u.values, 2)
    return tuple(
        LatticeSeq(
            u.d,
            u.N + 1,
            u.h,
            (_shifted(padded, j, 1) - _shifted(padded, j, -1)) / (2 * u.h),
        )
        for j in range(u.d)
    )


def op_forward_difference(u: LatticeSeq, axis: int) -> LatticeSeq:
    """(u_{k+e_j} - u_k) / h along one axis, on the radius N+1 box."""
    padded = np.pad(u.values, 2)
    return LatticeSeq(
        u.d, u.N + 1, u.h, (_shifted(padded, axis, 1) - _shifted(padded, axis, 0)) / u.h
    )


def op_backward_difference(u: LatticeSeq, axis: int) -> LatticeSeq:
    """(u_k - u_{k-e_j}) / h along one axis, on the radius N+1 box."""
    padded = np.pad(u.values, 2)
    return LatticeSeq(
        u.d, u.N + 1, u.h, (_shifted(padded, axis, 0) - _shifted(padded, axis, -1)) / u.h
    )


def op_laplacian(u: LatticeSeq) -> LatticeSeq:
    """Delta_d u_k = sum_j (u_{k+e_j} - 2u_k + u_{k-e_j}) / h^2."""
    padded = np.pad(u.values, 2)
    total = sum(
        _shifted(padded, j, 1) - 2 * _shifted(padded, j, 0) + _shifted(padded, j, -1)
        for j in range(u.d)
    )
    return LatticeSeq(u.d, u.N + 1, u.h, np.asarray(total) / u.h**2)


def neighbour_sum(u: LatticeSeq) -> LatticeSeq:
    """sum_j (u_{k+e_j} + u_{k-e_j}) on the radius N+1 box."""
    padded = np.pad(u.values, 2)
    total = sum(_shifted(padded, j, 1) + _shifted(padded, j, -1) for j in range(u.d))
    return LatticeSeq(u.d, u.N + 1, u.h, np.asarray(total))


# -----------------------------------------------------------------------------
# Uncertainty inequalities
# -----------------------------------------------------------------------------


@dataclass
class UncertaintyReport:
    """One instance of |<-[S,A]u,u>| <= 2 ||Su|| ||Au||.

    `ratio` is lhs / (2 pos_factor mom_factor), or 0 with `degenerate` set when
    the right side vanishes.
    """

    lhs: float
    pos_factor: float
    mom_factor: float
    ratio: float
    equality: bool
    degenerate: bool = False

    @property
    def a(self) -> float:
        return self.pos_factor**2

    @property
    def b(self) -> float:
        return self.mom_factor**2


def make_report(lhs: float, pos_factor: float, mom_factor: float) -> UncertaintyReport:
    """Build a report, handling a vanishing right side."""
    bound = 2.0 * pos_factor * mom_factor
    if bound == 0.0:
        return UncertaintyReport(lhs, pos_factor, mom_factor, 0.0, False, degenerate=True)
    ratio = lhs / bound
    return UncertaintyReport(
        lhs=lhs,
        pos_factor=pos_factor,
        mom_factor=mom_factor,
        ratio=ratio,
        equality=abs(ratio - 1.0) <= EQUALITY_TOL,
    )


def _require_nonzero(u: LatticeSeq) -> None:
    if not np.any(u.values):
        raise DegenerateInputError("The zero sequence has no uncertainty ratio")


def main_lhs_forms(u: LatticeSeq) -> tuple[float, float]:
    """Both printed forms of the main inequality's left side.

    Returns:
        (neighbour form, difference form): the first averages u_{k+e_j} and
        u_{k-e_j} against conj(u_k), the second is
        |d ||u||^2 - (h^2/2) sum_j ||d_j^+ u||^2|.
    """
    weight = u.h**u.d
    neighbours = neighbour_sum(u).crop(u.N)
    neighbour_form = abs(weight * np.vdot(u.values, neighbours.values) / 2)

    forward_mass = sum(op_forward_difference(u, j).norm_squared() for j in range(u.d))
    difference_form = abs(u.d * u.norm_squared() - (u.h**2 / 2) * forward_mass)
    return float(neighbour_form), float(difference_form)


def uncertainty_main(u: LatticeSeq) -> UncertaintyReport:
    """Evaluate the main discrete uncertainty inequality for u.

    Raises:
        DegenerateInputError: If u is identically zero.
    """
    _require_nonzero(u)
    neighbour_form, difference_form = main_lhs_forms(u)
    logger.debug("Main inequality left side: %.17g vs %.17g", neighbour_form, difference_form)
    return make_report(
        difference_form,
        vector_norm(op_position(u)),
        vector_norm(op_momentum(u)),
    )


def uncertainty_second(u: LatticeSeq) -> UncertaintyReport:
    """Evaluate the second relation, with S~ = kh and A~u = i(u_{k+1} + u_{k-1})/2.

    Raises:
        UnsupportedDimensionError: If d != 1.
        DegenerateInputError: If u is identically zero.
    """
    if u.d != 1:
        raise UnsupportedDimensionError("The second relation is defined for d = 1 only")
    _require_nonzero(u)

    lhs = abs(second_normalization_quantity(u))
    averaged = neighbour_sum(u).scaled(0.5)
    return make_report(lhs, vector_norm(op_position(u)), averaged.norm())


def commutator_expectation(u: LatticeSeq) -> complex:
    """<-[S,A]u, u> = sum_j <(A_j S_j - S_j A_j) u, u>, built from the operators."""
    total = 0j
    for j in range(u.d):
        a_s = op_momentum(op_position(u)[j])[j]
        s_a = op_position(op_momentum(u)[j])[j]
        total += inner_product(a_s, u) - inner_product(s_a, u)
    return total


def normalization_quantity(u: LatticeSeq) -> float:
    """Re h^d sum_k sum_j u_k conj(u_{k+e_j}), the quantity normalized to 2."""
    padded = np.pad(u.values, 2)
    centre = _shifted(padded, 0, 0)
    total = sum(np.vdot(_shifted(padded, j, 1), centre) for j in range(u.d))
    return float(np.real(u.h**u.d * total))


def second_normalization_quantity(u: LatticeSeq) -> complex:
    """h^2 sum_k (u_{k+1} - u_{k-1})/2 conj(u_k); purely imaginary."""
    if u.d != 1:
        raise UnsupportedDimensionError("The second relation is defined for d = 1 only")
    padded = np.pad(u.values, 1)
    difference = (padded[2:] - padded[:-2]) / 2
    return complex(u.h**2 * np.vdot(u.values, difference))


def perturb_to_admissible(u: LatticeSeq, eps: float) -> LatticeSeq:
    """Move u by at most eps so that its normalization quantity is positive.

    Data with vanishing nearest-neighbour correlation are dense-complement:
    changing one coordinate next to the support is enough. Data whose
    quantity is already nonzero are returned unchanged (on the radius N+1 box).

    Raises:
        DegenerateInputError: If u is identically zero.
    """
    if eps <= 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    _require_nonzero(u)
    grown = u.embed(u.N + 1)
    if normalization_quantity(u) != 0.0:
        return grown

    sums = neighbour_sum(u).values
    site = np.unravel_index(int(np.argmax(np.abs(sums))), sums.shape)
    direction = sums[site] / abs(sums[site])
    bump = np.zeros_like(grown.values)
    bump[site] = eps / u.h ** (u.d / 2) * direction
    return grown.with_values(grown.values + bump)


# -----------------------------------------------------------------------------
# Truncation of the product minimizer
# -----------------------------------------------------------------------------


def _ratio_tail_masses(z: float) -> tuple[np.ndarray, float]:
    size = abs(z)
    order = math.ceil(size + 10 * math.sqrt(size)) + 60
    ratios = bessel_i_ratios(order, z).values.real
    squares = ratios**2
    total = squares[0] + 2 * squares[1:].sum()
    # outside[N] = mass with |k| > N along one axis
    outside = 2 * np.concatenate([np.cumsum(squares[::-1])[::-1][1:], [0.0]])
    return outside, float(total)


def tail_bound(z: float, N: int, d: int = 1) -> float:
    """Relative l2 mass of prod_j I_{k_j}(z)/I_0(z) outside the box of radius N."""
    outside, total = _ratio_tail_masses(z)
    fraction = float(outside[N]) / total if N < len(outside) else 0.0
    return float(-math.expm1(d * math.log1p(-fraction)))


def truncation_radius(z: float, d: int = 1, tol: float = TAIL_TOL) -> int:
    """Smallest box radius whose tail_bound is below tol."""
    outside, total = _ratio_tail_masses(z)
    for N, mass in enumerate(outside):
        fraction = float(mass) / total
        if -math.expm1(d * math.log1p(-fraction)) < tol:
            return max(N, 1)
    return len(outside)
