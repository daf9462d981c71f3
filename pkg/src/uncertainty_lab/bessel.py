"""Modified Bessel functions and finite continued fractions.

The I family is computed by Miller's backward recurrence and normalized with
the generating identity e^z = I_0(z) + 2 sum_k I_k(z). Values are carried in
exponentially scaled form, I_nu(z) * exp(-|Re z|), so that arguments like
1/(alpha h^2) ~ 400 never overflow. Ratios I_nu/I_0 need no normalization at
all and stay finite for any |z|.

K_nu(x) for real x > 0 is produced by upward recurrence from quadrature seeds;
it is only used as an oracle for the Dirichlet continued-fraction closed form.
"""

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import BesselOverflowError, DegenerateFractionError, InvalidArgumentError

logger = logging.getLogger("uncertainty_lab")

# Panels for the composite-Simpson oracle on [0, pi]
QUADRATURE_PANELS = 4096

# exp(700) is the largest scale factor we unscale by
MAX_UNSCALED_EXPONENT = 700.0

_RESCALE_THRESHOLD = 1e250
_RESCALE_FACTOR = 1e-250
_CF_RESCALE_THRESHOLD = 1e150
_CF_RESCALE_FACTOR = 2.0**-500


# -----------------------------------------------------------------------------
# Argument types
# -----------------------------------------------------------------------------


def _check_argument(z: complex | float) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidArgumentError(f"Bessel argument must be finite, got {z!r}")
    if z.real < 0:
        raise InvalidArgumentError(
            f"Bessel argument must have Re z >= 0, got {z!r} (use alpha > 0)"
        )
    return z


@dataclass(frozen=True)
class BesselArg:
    """Argument and highest order of a Bessel family evaluation."""

    z: complex
    nu_max: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "z", _check_argument(self.z))
        if int(self.nu_max) != self.nu_max or self.nu_max < 0:
            raise InvalidArgumentError(f"nu_max must be a nonnegative integer, got {self.nu_max}")
        object.__setattr__(self, "nu_max", int(self.nu_max))


@dataclass(frozen=True)
class RatioFamily:
    """Ratios I_nu(z)/I_0(z) for nu = 0..nu_max.

    `degenerate` is set when z = 0, where the ratios for nu > 0 are the limit
    value 0 rather than a quotient.
    """

    values: np.ndarray
    degenerate: bool


# -----------------------------------------------------------------------------
# Backward recurrence
# -----------------------------------------------------------------------------


def miller_start_order(nu_max: int, z: complex) -> int:
    """Starting order for the backward recurrence.

    The base rule nu_max + ceil(10 + 2 sqrt|z|) is widened so that both the
    Miller error and the dropped tail of the normalization sum stay below
    double precision for large real |z| (I_n/I_0 ~ exp(-n^2/2z) there) and
    for large imaginary |z| (where the oscillatory region extends to |Im z|).
    """
    size = abs(z)
    imag = abs(z.imag)
    rule = nu_max + math.ceil(10 + 2 * math.sqrt(size))
    tail = math.ceil(math.sqrt(nu_max**2 + 80 * size)) + 20
    oscillatory = math.ceil(imag + 4 * imag ** (1 / 3)) + 30
    return max(rule, tail, oscillatory)


def _backward_sweep(nu_max: int, z: complex) -> np.ndarray:
    """Unnormalized minimal solution f_0..f_start of the I recurrence."""
    start = miller_start_order(nu_max, z)
    logger.debug("Miller recurrence for z=%s, nu_max=%d starts at order %d", z, nu_max, start)

    values = [0j] * (start + 2)
    values[start] = 1.0 + 0j
    two_over_z = 2.0 / z
    for k in range(start, 0, -1):
        lower = values[k + 1] + k * two_over_z * values[k]
        values[k - 1] = lower
        if abs(lower) > _RESCALE_THRESHOLD:
            for i in range(k - 1, start + 1):
                values[i] *= _RESCALE_FACTOR

    return np.array(values[: start + 1], dtype=complex)


def bessel_i_family_scaled(arg: BesselArg) -> np.ndarray:
    """Return I_0(z)..I_{nu_max}(z) times exp(-|Re z|).

    Args:
        arg: Argument with Re z >= 0 and the highest order needed.

    Returns:
        Complex array of length nu_max + 1.
    """
    z, nu_max = arg.z, arg.nu_max
    result = np.zeros(nu_max + 1, dtype=complex)
    if z == 0:
        result[0] = 1.0
        return result

    sweep = _backward_sweep(nu_max, z)
    total = sweep[0] + 2.0 * sweep[1:].sum()
    # e^z = total * c and the scaled family is f_k * c * e^{-Re z}
    phase = cmath.exp(1j * z.imag)
    result[:] = sweep[: nu_max + 1] * (phase / total)
    return result


def bessel_i_family(arg: BesselArg) -> np.ndarray:
    """Return I_0(z)..I_{nu_max}(z) for Re z >= 0.

    Raises:
        InvalidArgumentError: If z is not finite or Re z < 0.
        BesselOverflowError: If exp(Re z) is not representable; use
            `bessel_i_ratio` or `bessel_i_family_scaled` instead.
    """
    if arg.z.real > MAX_UNSCALED_EXPONENT:
        raise BesselOverflowError(
            f"I_nu({arg.z}) overflows double precision; "
            "use bessel_i_ratio or bessel_i_family_scaled"
        )
    return bessel_i_family_scaled(arg) * math.exp(arg.z.real)


def bessel_i_ratios(nu_max: int, z: complex | float) -> RatioFamily:
    """Return the ratios I_nu(z)/I_0(z) for nu = 0..nu_max from one sweep."""
    arg = BesselArg(z, nu_max)
    values = np.zeros(arg.nu_max + 1, dtype=complex)
    values[0] = 1.0
    if arg.z == 0:
        if arg.nu_max > 0:
            logger.warning("Bessel ratio at z=0 is degenerate; using the limit value 0")
        return RatioFamily(values=values, degenerate=arg.nu_max > 0)

    sweep = _backward_sweep(arg.nu_max, arg.z)
    values[:] = sweep[: arg.nu_max + 1] / sweep[0]
    return RatioFamily(values=values, degenerate=False)


def bessel_i_ratio(nu: int, z: complex | float) -> complex:
    """Return I_nu(z)/I_0(z).

    Finite for every z with Re z >= 0, including arguments where I_0 alone
    overflows. At z = 0 the ratio for nu > 0 is returned as its limit 0 and a
    warning is logged; `bessel_i_ratios` exposes the flag.
    """
    return complex(bessel_i_ratios(nu, z).values[nu])


def bessel_j_family(nu_max: int, y: float) -> np.ndarray:
    """Return J_0(y)..J_{nu_max}(y) for real y.

    Independent Miller recurrence normalized by 1 = J_0 + 2 sum J_{2k}; used to
    cross-check I_k(iy) = i^k J_k(y) on the purely imaginary axis.
    """
    if not math.isfinite(y):
        raise InvalidArgumentError(f"J argument must be finite, got {y!r}")
    result = np.zeros(nu_max + 1)
    if y == 0:
        result[0] = 1.0
        return result

    x = abs(y)
    start = miller_start_order(nu_max, complex(0.0, x))
    values = [0.0] * (start + 2)
    values[start] = 1.0
    for k in range(start, 0, -1):
        lower = (2.0 * k / x) * values[k] - values[k + 1]
        values[k - 1] = lower
        if abs(lower) > _RESCALE_THRESHOLD:
            for i in range(k - 1, start + 1):
                values[i] *= _RESCALE_FACTOR

    sweep = np.array(values[: start + 1])
    total = sweep[0] + 2.0 * sweep[2::2].sum()
    result[:] = sweep[: nu_max + 1] / total
    if y < 0:
        result[1::2] *= -1.0
    return result


# -----------------------------------------------------------------------------
# Second kind
# -----------------------------------------------------------------------------


def _k_seed_scaled(nu: int, x: float) -> float:
    """exp(x) K_nu(x) from the integral of exp(-x(cosh t - 1)) cosh(nu t)."""
    upper = math.acosh(1.0 + 50.0 / x)
    for _ in range(3):
        upper = max(upper, math.acosh(1.0 + (40.0 + nu * upper) / x))

    def integrand(t: float) -> float:
        return math.exp(-x * (math.cosh(t) - 1.0)) * math.cosh(nu * t)

    value, _ = integrate.quad(integrand, 0.0, upper, epsabs=0.0, epsrel=1e-14, limit=200)
    return float(value)


def bessel_k_family_scaled(nu_max: int, x: float) -> np.ndarray:
    """Return K_0(x)..K_{nu_max}(x) times exp(x) for real x > 0."""
    if not math.isfinite(x) or x <= 0:
        raise InvalidArgumentError(f"K argument must be positive and finite, got {x!r}")
    if nu_max < 0:
        raise InvalidArgumentError(f"nu_max must be nonnegative, got {nu_max}")

    result = np.zeros(nu_max + 1)
    result[0] = _k_seed_scaled(0, x)
    if nu_max >= 1:
        result[1] = _k_seed_scaled(1, x)
    # Upward recurrence is stable for the dominant K solution
    for nu in range(1, nu_max):
        result[nu + 1] = result[nu - 1] + (2.0 * nu / x) * result[nu]
    if not np.all(np.isfinite(result)):
        raise BesselOverflowError(f"K family up to order {nu_max} overflows at x={x}")
    return result


def bessel_k_family(nu_max: int, x: float) -> np.ndarray:
    """Return K_0(x)..K_{nu_max}(x) for real x > 0."""
    scaled = bessel_k_family_scaled(nu_max, x)
    if x > MAX_UNSCALED_EXPONENT:
        raise BesselOverflowError(f"K_nu({x}) underflows; use bessel_k_family_scaled")
    return scaled * math.exp(-x)


# -----------------------------------------------------------------------------
# Oracles and asymptotics
# -----------------------------------------------------------------------------


def quadrature_bessel_i(m: int, z: complex | float, panels: int = QUADRATURE_PANELS) -> complex:
    """Composite-Simpson value of (1/pi) int_0^pi exp(z cos t) cos(m t) dt.

    This is the independent oracle for I_m(z); it shares no code with the
    recurrence.
    """
    z = complex(z)
    theta = np.linspace(0.0, math.pi, panels + 1)
    integrand = np.exp(z * np.cos(theta)) * np.cos(m * theta)
    real = integrate.simpson(integrand.real, x=theta)
    imag = integrate.simpson(integrand.imag, x=theta)
    return complex(real, imag) / math.pi


def i0_asymptotic_gap(t: float) -> float:
    """Return |sqrt(2 pi t) I_0(t) e^{-t} - 1|, bounded above by 1/t for t >= 1."""
    if not math.isfinite(t) or t <= 0:
        raise InvalidArgumentError(f"t must be positive and finite, got {t!r}")
    scaled = bessel_i_family_scaled(BesselArg(t, 0))[0].real
    return abs(math.sqrt(2.0 * math.pi * t) * scaled - 1.0)


# -----------------------------------------------------------------------------
# Continued fractions
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuedFraction:
    """Finite continued fraction a_0 + 1/(a_1 + 1/(... + 1/a_n))."""

    partial_quotients: tuple[float, ...]

    def __post_init__(self) -> None:
        quotients = tuple(float(a) for a in self.partial_quotients)
        if not quotients:
            raise InvalidArgumentError("A continued fraction needs at least one quotient")
        if not all(math.isfinite(a) for a in quotients):
            raise InvalidArgumentError("Partial quotients must be finite")
        object.__setattr__(self, "partial_quotients", quotients)


@dataclass(frozen=True)
class CFValue:
    """Value of a continued fraction with its last convergent pair.

    When `rescaled` is set, p and q carry a common power-of-two factor.
    """

    value: float
    p: float
    q: float
    rescaled: bool = False


def cf_eval(cf: ContinuedFraction) -> CFValue:
    """Evaluate a continued fraction by the convergent recurrence.

    p_n = a_n p_{n-1} + p_{n-2}, q_n = a_n q_{n-1} + q_{n-2}, starting from
    p_{-1} = 1, p_0 = a_0, q_{-1} = 0, q_0 = 1.

    Raises:
        DegenerateFractionError: If some convergent denominator q_j is zero.
    """
    quotients = cf.partial_quotients
    p_prev, p = 1.0, quotients[0]
    q_prev, q = 0.0, 1.0
    rescaled = False

    for j, a in enumerate(quotients[1:], start=1):
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        if q == 0.0:
            raise DegenerateFractionError(j)
        if max(abs(p), abs(q)) > _CF_RESCALE_THRESHOLD:
            p_prev *= _CF_RESCALE_FACTOR
            p *= _CF_RESCALE_FACTOR
            q_prev *= _CF_RESCALE_FACTOR
            q *= _CF_RESCALE_FACTOR
            rescaled = True

    return CFValue(value=p / q, p=p, q=q, rescaled=rescaled)


def cf_value(quotients: list[float] | tuple[float, ...]) -> float:
    """Shorthand for cf_eval(ContinuedFraction(quotients)).value."""
    return cf_eval(ContinuedFraction(tuple(quotients))).value
