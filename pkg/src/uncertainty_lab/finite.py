"""Uncertainty relations for finite sequences u_{-N}..u_N.

Three variants share one shape: a diagonal position matrix S = diag(q_k) and
a skew-symmetric difference matrix A.

    DFT        q_k = ((2N+1)h / 2pi) sin(2pi k / (2N+1)), cyclic A
    PERIODIC   q_k = k h, cyclic A
    DIRICHLET  q_k = k h, A with zero first/last rows and columns

Each variant has a minimizer solving (alpha S + A) omega = 0, computed both
from the kernel of the matrix and by continued fractions, and a discrete
Schrodinger equation without a Virial identity.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any

import numpy as np
from scipy import linalg

from .bessel import BesselArg, bessel_i_family, bessel_i_ratios, bessel_k_family, cf_value
from .errors import (
    AmbiguousMinimizerError,
    CaseTooSmallError,
    ConstraintViolationError,
    DegenerateInputError,
    InvalidArgumentError,
    NumericalError,
)
from .evolution import third_difference
from .lattice import UncertaintyReport, make_report

logger = logging.getLogger("uncertainty_lab")

# Singular values below this fraction of the largest count as kernel
KERNEL_TOL = 1e-10

# Largest N for which the K/I closed form is evaluated without overflow worries
CLOSED_FORM_MAX_N = 12

# Errors below this are treated as converged when checking monotonicity
ROUNDING_FLOOR = 1e-14

# Step of the fourth-order third-difference estimate
THIRD_DIFF_STEP = 1e-2

# |F'''| above this counts as nonzero
NONZERO_THRESHOLD = 1e-8


class Variant(str, Enum):
    """Finite-sequence uncertainty relation."""

    DFT = "dft"
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"


class QConvention(str, Enum):
    """Position weights of the DFT variant."""

    UNCERTAINTY = "uncertainty"  # ((2N+1)h / 2pi) sin(2pi k / (2N+1))
    LIMIT = "limit"  # (Nh / pi) sin(pi k / N)


class MinimizerMethod(str, Enum):
    LINEAR_SOLVE = "linear-solve"
    CONTINUED_FRACTION = "continued-fraction"


@dataclass(frozen=True)
class FiniteCase:
    """Operator matrices of one finite variant. Build with `build_case`."""

    variant: Variant
    N: int
    h: float
    alpha: float
    q_convention: QConvention = QConvention.UNCERTAINTY
    S: np.ndarray = field(compare=False, repr=False, default_factory=lambda: np.zeros((0, 0)))
    A: np.ndarray = field(compare=False, repr=False, default_factory=lambda: np.zeros((0, 0)))

    @property
    def size(self) -> int:
        return 2 * self.N + 1

    @property
    def q(self) -> np.ndarray:
        return np.diag(self.S)

    @property
    def cyclic(self) -> bool:
        return self.variant is not Variant.DIRICHLET

    def indices(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def to_dict(self) -> dict[str, Any]:
        """Case descriptor {variant, N, h, alpha, q_convention}."""
        return {
            "variant": self.variant.value,
            "N": self.N,
            "h": self.h,
            "alpha": self.alpha,
            "q_convention": self.q_convention.value,
        }


@dataclass
class FiniteMinimizer:
    """Solution of (alpha S + A) omega = 0 with omega_0 = 1."""

    case: FiniteCase
    values: np.ndarray
    method: MinimizerMethod
    residual: float

    def __getitem__(self, k: int) -> float:
        return float(self.values[k + self.case.N])


@dataclass
class CFLimitRow:
    """One Dirichlet continued fraction against its N -> infinity limit."""

    N: int
    value: float
    limit: float
    error: float
    closed_form: float | None = None


@dataclass
class FiniteVirialSample:
    """F and its time derivatives at one time for a finite evolution."""

    t: float
    F: float
    Fdot: float
    Fddot: float
    Fddot_closed: float | None
    Fdddot: float
    Fdddot_estimate: float
    norm_drift: float

    @property
    def third_derivative_nonzero(self) -> bool:
        return abs(self.Fdddot) > NONZERO_THRESHOLD


@dataclass(frozen=True)
class Counterexample:
    """Initial datum with a known sign of F''(0) (h = 1)."""

    variant: Variant
    u0: tuple[float, ...]
    fddot0: float

    @property
    def N(self) -> int:
        return (len(self.u0) - 1) // 2


COUNTEREXAMPLES: tuple[Counterexample, ...] = (
    Counterexample(Variant.PERIODIC, (0, 1, 0, 0, 0, 1, 0), 8.0),
    Counterexample(Variant.PERIODIC, (2, 1, 0, 0, 0, 1, 0), -12.0),
    Counterexample(Variant.DIRICHLET, (0, 1, 0, 0, 0, 1, 0), -12.0),
    Counterexample(Variant.DIRICHLET, (0, 1, 2, 0, 0, 1, 0), 4.0),
)


# -----------------------------------------------------------------------------
# Construction
# -----------------------------------------------------------------------------


def _position_weights(variant: Variant, N: int, h: float, convention: QConvention) -> np.ndarray:
    k = np.arange(-N, N + 1)
    if variant is not Variant.DFT:
        return k * h
    if convention is QConvention.LIMIT:
        return (N * h / math.pi) * np.sin(math.pi * k / N)
    M = 2 * N + 1
    return (M * h / (2 * math.pi)) * np.sin(2 * math.pi * k / M)


def _difference_matrix(variant: Variant, N: int, h: float) -> np.ndarray:
    identity = np.eye(2 * N + 1)
    if variant is Variant.DIRICHLET:
        A = (np.eye(2 * N + 1, k=1) - np.eye(2 * N + 1, k=-1)) / (2 * h)
        A[[0, -1], :] = 0.0
        A[:, [0, -1]] = 0.0
        return A
    return (np.roll(identity, 1, axis=1) - np.roll(identity, -1, axis=1)) / (2 * h)


def build_case(
    variant: Variant | str,
    N: int,
    h: float = 1.0,
    alpha: float = 1.0,
    q_convention: QConvention | str = QConvention.UNCERTAINTY,
) -> FiniteCase:
    """Build the S and A matrices of a finite variant.

    Raises:
        CaseTooSmallError: If N < 2.
        InvalidArgumentError: If h or alpha is not positive, or a name is unknown.
    """
    try:
        variant = Variant(variant)
        q_convention = QConvention(q_convention)
    except ValueError as e:
        raise InvalidArgumentError(str(e)) from e
    if int(N) != N or N < 2:
        raise CaseTooSmallError(f"Finite cases need an integer N >= 2, got {N}")
    if not math.isfinite(h) or h <= 0:
        raise InvalidArgumentError(f"Mesh size h must be positive, got {h}")
    if not math.isfinite(alpha) or alpha <= 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")

    N = int(N)
    S = np.diag(_position_weights(variant, N, h, q_convention))
    A = _difference_matrix(variant, N, h)
    S.setflags(write=False)
    A.setflags(write=False)
    return FiniteCase(variant, N, float(h), float(alpha), q_convention, S, A)


def _as_vector(case: FiniteCase, u: Sequence[complex] | np.ndarray) -> np.ndarray:
    vector = np.asarray(u, dtype=complex).reshape(-1)
    if vector.size != case.size:
        raise InvalidArgumentError(f"Expected {case.size} values for N={case.N}, got {vector.size}")
    if not np.all(np.isfinite(vector)):
        raise InvalidArgumentError("Sequence values must be finite")
    if case.variant is Variant.DIRICHLET and (vector[0] != 0 or vector[-1] != 0):
        raise ConstraintViolationError("Dirichlet sequences must vanish at k = -N and k = N")
    return vector


# -----------------------------------------------------------------------------
# Uncertainty relation
# -----------------------------------------------------------------------------


def commutator_form(case: FiniteCase, u: Sequence[complex] | np.ndarray) -> float:
    """<-[S,A]u, u> from the closed form sum (q_{k+1} - q_k) Re(u_{k+1} conj(u_k)).

    The sum runs cyclically for DFT and PERIODIC and over interior pairs for
    DIRICHLET.
    """
    u = _as_vector(case, u)
    q = case.q
    if case.cyclic:
        following = np.roll(u, -1)
        steps = np.roll(q, -1) - q
        return float(np.sum(steps * np.real(following * np.conj(u))))
    inner = slice(1, case.size - 2)
    outer = slice(2, case.size - 1)
    steps = q[outer] - q[inner]
    return float(np.sum(steps * np.real(u[outer] * np.conj(u[inner]))))


def commutator_form_matrix(case: FiniteCase, u: Sequence[complex] | np.ndarray) -> float:
    """<-[S,A]u, u> = h u^* (AS - SA) u from the matrices."""
    u = _as_vector(case, u)
    commutator = case.A @ case.S - case.S @ case.A
    return float(np.real(case.h * np.vdot(u, commutator @ u)))


def _weighted_norm(case: FiniteCase, v: np.ndarray) -> float:
    return math.sqrt(case.h * float(np.sum(np.abs(v) ** 2)))


def uncertainty_finite(case: FiniteCase, u: Sequence[complex] | np.ndarray) -> UncertaintyReport:
    """|<-[S,A]u, u>| <= 2 ||Su|| ||Au|| with h-weighted norms.

    Raises:
        DegenerateInputError: If u is identically zero.
        ConstraintViolationError: If a Dirichlet u has nonzero boundary values.
    """
    u = _as_vector(case, u)
    if not np.any(u):
        raise DegenerateInputError("The zero sequence has no uncertainty ratio")
    return make_report(
        abs(commutator_form(case, u)),
        _weighted_norm(case, case.S @ u),
        _weighted_norm(case, case.A @ u),
    )


def _require_cyclic(case: FiniteCase) -> None:
    if not case.cyclic:
        raise InvalidArgumentError("The Dirichlet difference matrix is not circulant")


def dft_momentum_norm(case: FiniteCase, u: Sequence[complex] | np.ndarray) -> float:
    """||Au|| from the unitary DFT: (h sum_m sin^2(2 pi m / (2N+1)) / h^2 |u^_m|^2)^(1/2)."""
    _require_cyclic(case)
    u = _as_vector(case, u)
    spectrum = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(u), norm="ortho"))
    theta = 2 * math.pi * case.indices() / case.size
    return _weighted_norm(case, np.sin(theta) / case.h * spectrum)


def circulant_residual(case: FiniteCase) -> float:
    """max |A - F^H diag(i sin(theta_m) / h) F| for the unitary DFT matrix F."""
    _require_cyclic(case)
    F = linalg.dft(case.size, scale="sqrtn")
    theta = 2 * math.pi * np.arange(case.size) / case.size
    rebuilt = F.conj().T @ np.diag(1j * np.sin(theta) / case.h) @ F
    return float(np.max(np.abs(case.A - rebuilt)))


# -----------------------------------------------------------------------------
# Minimizers
# -----------------------------------------------------------------------------


def _euler_matrix(case: FiniteCase) -> np.ndarray:
    return case.alpha * case.S + case.A


def _kernel_minimizer(case: FiniteCase) -> np.ndarray:
    _, singular, vh = linalg.svd(_euler_matrix(case))
    logger.debug("Smallest singular values: %s", singular[-3:])
    kernel_dim = int(np.sum(singular < KERNEL_TOL * singular[0]))
    if kernel_dim != 1:
        raise AmbiguousMinimizerError([float(s) for s in singular[-3:]])
    vector = np.real(vh[-1])
    centre = vector[case.N]
    if abs(centre) < KERNEL_TOL * float(np.max(np.abs(vector))):
        raise NumericalError("Kernel vector vanishes at k = 0; cannot set omega_0 = 1")
    return vector / centre


def _cf_quotients(case: FiniteCase, m: int) -> list[float]:
    """Partial quotients of omega_{m-1} / omega_m."""
    q = case.q
    scale = 2 * case.alpha * case.h
    if case.variant is Variant.DIRICHLET:
        return [scale * q[i + case.N] for i in range(m, case.N)]
    quotients = [scale * q[i + case.N] for i in range(m, case.N)]
    quotients.append(1.0 + scale * q[2 * case.N])
    return quotients


def _cf_minimizer(case: FiniteCase, upto: int | None = None) -> np.ndarray:
    """omega_k = prod_{m<=k} 1/[quotients of m] for k >= 0, mirrored for k < 0."""
    last = case.N - 1 if case.variant is Variant.DIRICHLET else case.N
    upto = last if upto is None else min(upto, last)
    half = np.zeros(case.N + 1)
    half[0] = 1.0
    for m in range(1, upto + 1):
        half[m] = half[m - 1] / cf_value(_cf_quotients(case, m))
    return np.concatenate([half[:0:-1], half])


def solve_minimizer(
    case: FiniteCase, method: MinimizerMethod | str = MinimizerMethod.LINEAR_SOLVE
) -> FiniteMinimizer:
    """Solve (alpha S + A) omega = 0 with omega_0 = 1.

    LINEAR_SOLVE takes the smallest singular direction of alpha S + A;
    CONTINUED_FRACTION builds omega_k / omega_{k-1} from continued fractions of
    the recurrence, which is even in k for every variant.

    Raises:
        AmbiguousMinimizerError: If the kernel is not one-dimensional.
        DegenerateFractionError: If a convergent denominator vanishes.
    """
    method = MinimizerMethod(method)
    if method is MinimizerMethod.LINEAR_SOLVE:
        values = _kernel_minimizer(case)
    else:
        values = _cf_minimizer(case)
    residual = float(np.linalg.norm(_euler_matrix(case) @ values) / np.linalg.norm(values))
    return FiniteMinimizer(case=case, values=values, method=method, residual=residual)


# -----------------------------------------------------------------------------
# Limits
# -----------------------------------------------------------------------------


def dirichlet_closed_form(k: int, N: int, alpha: float, h: float) -> float:
    """[2k alpha h^2, ..., 2(N-1) alpha h^2] through modified Bessel functions.

    ((-1)^{N+k} K_{k-1} I_N + I_{k-1} K_N) / ((-1)^{N+k+1} K_k I_N + I_k K_N)
    at z = 1/(alpha h^2).
    """
    if k < 1 or N <= k:
        raise InvalidArgumentError(f"Need 1 <= k < N, got k={k}, N={N}")
    z = 1.0 / (alpha * h**2)
    I = bessel_i_family(BesselArg(z, N)).real  # noqa: E741
    K = bessel_k_family(N, z)
    sign = (-1.0) ** (N + k)
    numerator = sign * K[k - 1] * I[N] + I[k - 1] * K[N]
    denominator = -sign * K[k] * I[N] + I[k] * K[N]
    return float(numerator / denominator)


def dirichlet_cf_limit(
    k: int, alpha: float, h: float, N_list: Sequence[int]
) -> list[CFLimitRow]:
    """[2k alpha h^2, ..., 2(N-1) alpha h^2] against I_{k-1}(z)/I_k(z) for each N."""
    if k < 1:
        raise InvalidArgumentError(f"k must be at least 1, got {k}")
    z = 1.0 / (alpha * h**2)
    ratios = bessel_i_ratios(k, z).values.real
    limit = float(ratios[k - 1] / ratios[k])

    rows = []
    for N in N_list:
        if N <= k:
            raise InvalidArgumentError(f"N must exceed k={k}, got {N}")
        value = cf_value([2 * i * alpha * h**2 for i in range(k, N)])
        closed = dirichlet_closed_form(k, N, alpha, h) if N <= CLOSED_FORM_MAX_N else None
        rows.append(CFLimitRow(N, value, limit, abs(value - limit), closed))
    return rows


def errors_decreasing(errors: Sequence[float], floor: float = ROUNDING_FLOOR) -> bool:
    """True if each error is below the previous one or both are below floor."""
    return all(b < a or max(a, b) < floor for a, b in zip(errors, errors[1:]))


def _ceil_snapped(value: float) -> int:
    nearest = round(value)
    if abs(value - nearest) <= 1e-9 * max(1.0, abs(value)):
        return int(nearest)
    return math.ceil(value)


def dft_limit_profile(x: float, L: float, j: int, alpha: float = 1.0) -> tuple[float, float]:
    """(f_j^L(x), exp(L^2 (cos(pi x / L) - 1) / pi^2)).

    f_j^L(x) is omega_{sign(x) j} of the DFT minimizer with q_k = (Nh/pi) sin(pi k/N),
    N = ceil(jL/|x|) and h = |x|/j; f_j^L(0) = 1.
    """
    if not (math.isfinite(x) and math.isfinite(L)) or L <= 0:
        raise InvalidArgumentError(f"Need finite x and L > 0, got x={x}, L={L}")
    if abs(x) > L * (1 + 1e-12):
        raise InvalidArgumentError(f"|x| must not exceed L, got x={x}, L={L}")
    if j < 1:
        raise InvalidArgumentError(f"j must be a positive integer, got {j}")
    if x == 0:
        return 1.0, 1.0

    size = abs(x)
    N = _ceil_snapped(j * L / size)
    case = build_case(Variant.DFT, N, size / j, alpha, QConvention.LIMIT)
    values = _cf_minimizer(case, upto=j)
    limit = math.exp(L**2 * (math.cos(math.pi * x / L) - 1) / math.pi**2)
    return float(values[j + N]), limit


# -----------------------------------------------------------------------------
# Evolution and Virial failure
# -----------------------------------------------------------------------------


def finite_laplacian(case: FiniteCase) -> np.ndarray:
    """Real symmetric discrete Laplacian: cyclic, or interior-only for DIRICHLET."""
    M = case.size
    if case.cyclic:
        identity = np.eye(M)
        stencil = np.roll(identity, 1, axis=1) + np.roll(identity, -1, axis=1) - 2 * identity
    else:
        stencil = np.eye(M, k=1) + np.eye(M, k=-1) - 2 * np.eye(M)
        stencil[[0, -1], :] = 0.0
        stencil[:, [0, -1]] = 0.0
    return stencil / case.h**2


def _active(case: FiniteCase) -> slice:
    """Entries the evolution moves; Dirichlet boundary values stay exactly zero."""
    return slice(None) if case.cyclic else slice(1, case.size - 1)


@lru_cache(maxsize=64)
def _laplacian_spectrum(case: FiniteCase) -> tuple[np.ndarray, np.ndarray]:
    active = _active(case)
    eigenvalues, eigenvectors = linalg.eigh(finite_laplacian(case)[active, active])
    eigenvalues.setflags(write=False)
    eigenvectors.setflags(write=False)
    return eigenvalues, eigenvectors


def evolve_finite(case: FiniteCase, u0: Sequence[complex] | np.ndarray, t: float) -> np.ndarray:
    """exp(it Delta) u0 via the cached eigendecomposition of the Laplacian."""
    if not math.isfinite(t):
        raise InvalidArgumentError(f"Time must be finite, got {t!r}")
    u = _as_vector(case, u0)
    eigenvalues, eigenvectors = _laplacian_spectrum(case)
    active = _active(case)
    result = np.zeros_like(u)
    result[active] = eigenvectors @ (np.exp(1j * t * eigenvalues) * (eigenvectors.T @ u[active]))
    return result


def fddot_closed_form(case: FiniteCase, u: Sequence[complex] | np.ndarray) -> float | None:
    """Closed-form F'' for PERIODIC and DIRICHLET (None for DFT).

    The h = 1 expression is divided by h; F = h sum (kh)^2 |u_k|^2.
    """
    if case.variant is Variant.DFT:
        return None
    u = _as_vector(case, u)
    N = case.N
    if case.variant is Variant.PERIODIC:
        central = (np.roll(u, -1) - np.roll(u, 1)) / 2
        boundary = np.real(
            u[0] * np.conj(u[-2]) + u[1] * np.conj(u[-1]) - abs(u[-1]) ** 2 - abs(u[0]) ** 2
        )
        value = 8 * (float(np.sum(np.abs(central) ** 2)) + (2 * N + 1) * boundary / 4)
    else:
        central = (u[2:] - u[:-2]) / 2
        edges = abs(u[-2] / 2) ** 2 + abs(u[1] / 2) ** 2
        value = 8 * (float(np.sum(np.abs(central) ** 2)) - (2 * N - 2) * edges)
    return value / case.h


def finite_virial(case: FiniteCase, u0: Sequence[complex] | np.ndarray, t: float) -> FiniteVirialSample:
    """F(t) = h sum q_k^2 |u_k(t)|^2 and its derivatives along the finite evolution.

    F' = i h u^*[Phi, Delta]u, F'' = h u^*[Delta, [Phi, Delta]]u and
    F''' = i h u^*[M, Delta]u with M = [Delta, [Phi, Delta]]; F''' is also
    estimated by fourth-order differencing of F.

    Raises:
        ConstraintViolationError: If a Dirichlet u0 has nonzero boundary values.
    """
    start = _as_vector(case, u0)
    u = evolve_finite(case, start, t)
    phi = np.diag(case.q**2)
    laplacian = finite_laplacian(case)
    first = phi @ laplacian - laplacian @ phi
    second = laplacian @ first - first @ laplacian
    third = second @ laplacian - laplacian @ second

    def mass(s: float) -> float:
        v = evolve_finite(case, start, s)
        return case.h * float(np.sum(case.q**2 * np.abs(v) ** 2))

    return FiniteVirialSample(
        t=t,
        F=mass(t),
        Fdot=float(np.real(1j * case.h * np.vdot(u, first @ u))),
        Fddot=float(np.real(case.h * np.vdot(u, second @ u))),
        Fddot_closed=fddot_closed_form(case, u),
        Fdddot=float(np.real(1j * case.h * np.vdot(u, third @ u))),
        Fdddot_estimate=third_difference(mass, t, THIRD_DIFF_STEP),
        norm_drift=abs(_weighted_norm(case, u) - _weighted_norm(case, start)),
    )
