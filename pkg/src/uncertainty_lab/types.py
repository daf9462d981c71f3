"""Type definitions for uncertainty_lab using TypedDict for table rows."""

from typing import TypedDict


class ReportRecord(TypedDict):
    """One uncertainty-inequality evaluation."""

    index: int
    lhs: float
    pos_factor: float
    mom_factor: float
    ratio: float
    equality: bool
    degenerate: bool


class EvolutionRecord(TypedDict):
    """Evolved sequence summary at one time."""

    t: float
    norm: float
    F: float
    normalization: float
    closed_form_gap: float | None


class VirialRecord(TypedDict):
    """Weighted mass and its derivatives at one time."""

    t: float
    F: float
    Fdot: float
    Fddot: float
    fit_residual: float


class FiniteRecord(TypedDict):
    """Virial quantities of a finite-sequence evolution."""

    variant: str
    N: int
    h: float
    u0: str
    t: float
    F: float
    Fddot: float
    Fddot_closed: float | None
    Fddot_expected: float | None
    Fdddot: float


class ConvergenceRecord(TypedDict):
    """Sup error of a convergence sweep at one refinement level."""

    j: int
    sup_error: float
    worst_x: str


class ProfileRecord(TypedDict):
    """Finite DFT minimizer against its limit profile."""

    x: float
    j: int
    value: float
    limit: float
    error: float


class CFLimitRecord(TypedDict):
    """Dirichlet continued fraction against its Bessel-ratio limit."""

    N: int
    value: float
    limit: float
    error: float
    closed_form: float | None
