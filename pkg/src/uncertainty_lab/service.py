"""Service layer for uncertainty_lab - orchestrates library calls for the CLI."""

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import TypeVar

import numpy as np

from .evolution import (
    CoupledVariant,
    Method,
    PhiWeight,
    VirialTrace,
    evolve_schrodinger,
    padded_radius,
    virial_trace_coupled,
    virial_trace_schrodinger,
    weighted_mass,
)
from .finite import (
    COUNTEREXAMPLES,
    FiniteCase,
    FiniteMinimizer,
    MinimizerMethod,
    Variant,
    build_case,
    dft_limit_profile,
    dirichlet_cf_limit,
    finite_virial,
    solve_minimizer,
    uncertainty_finite,
)
from .lattice import (
    LatticeSeq,
    UncertaintyReport,
    normalization_quantity,
    random_sequence,
    uncertainty_main,
    uncertainty_second,
)
from .minimizer import (
    MinimizerSpec,
    gaussian_sweep,
    minimizer_at_time,
    minimizer_main,
    minimizer_second,
    recurrence_residual_main,
    recurrence_residual_second,
)
from .types import (
    CFLimitRecord,
    ConvergenceRecord,
    EvolutionRecord,
    FiniteRecord,
    ProfileRecord,
    ReportRecord,
)
from .utils import get_max_workers

logger = logging.getLogger("uncertainty_lab")

T = TypeVar("T")
R = TypeVar("R")

RELATIONS = ("main", "second")


@dataclass
class MinimizerResult:
    """A minimizer with its equality report and recurrence residual."""

    sequence: LatticeSeq
    report: UncertaintyReport
    residual: float


@dataclass
class FiniteMinimizerResult:
    """Both minimizer methods of a finite case and their agreement."""

    linear: FiniteMinimizer
    continued: FiniteMinimizer
    report: UncertaintyReport
    agreement: float


def report_record(index: int, report: UncertaintyReport) -> ReportRecord:
    return ReportRecord(
        index=index,
        lhs=report.lhs,
        pos_factor=report.pos_factor,
        mom_factor=report.mom_factor,
        ratio=report.ratio,
        equality=report.equality,
        degenerate=report.degenerate,
    )


class LabService:
    """High-level service running verifications and parameter sweeps.

    Sweeps fan out over a thread pool; results always come back in the
    order the inputs were given.
    """

    def __init__(self, max_workers: int | None = None):
        """Initialize the service.

        Args:
            max_workers: Worker pool size; read from UNCERTAINTY_LAB_THREADS
                when omitted.
        """
        self.max_workers = max_workers if max_workers is not None else get_max_workers()

    def _map(self, fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
        """Apply fn to every item in parallel, keeping input order."""
        if len(items) <= 1 or self.max_workers == 1:
            return [fn(item) for item in items]

        results: dict[int, R] = {}
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {executor.submit(fn, item): i for i, item in enumerate(items)}
            for future in as_completed(futures):
                results[futures[future]] = future.result()
        return [results[i] for i in range(len(items))]

    # -------------------------------------------------------------------------
    # Verification
    # -------------------------------------------------------------------------

    def random_sequences(
        self, count: int, seed: int, d: int = 1, N: int = 8, h: float = 1.0
    ) -> list[LatticeSeq]:
        """Generate `count` test data from one seeded generator, in order."""
        rng = np.random.default_rng(seed)
        return [random_sequence(rng, d, N, h) for _ in range(count)]

    def verify_sequences(
        self, sequences: Sequence[LatticeSeq], relation: str = "main"
    ) -> list[ReportRecord]:
        """Evaluate the main or second uncertainty relation for each sequence."""
        if relation not in RELATIONS:
            raise ValueError(f"Unknown relation: {relation}")
        check = uncertainty_main if relation == "main" else uncertainty_second
        logger.info("Verifying %d sequences...", len(sequences))
        reports = self._map(check, sequences)
        return [report_record(i, r) for i, r in enumerate(reports)]

    # -------------------------------------------------------------------------
    # Minimizers
    # -------------------------------------------------------------------------

    def build_minimizer(
        self, spec: MinimizerSpec, relation: str = "main", N: int | None = None
    ) -> MinimizerResult:
        """Build a minimizer and check that it attains equality."""
        if relation == "main":
            omega = minimizer_main(spec, N)
            return MinimizerResult(
                omega, uncertainty_main(omega), recurrence_residual_main(omega, spec.alpha)
            )
        if relation == "second":
            omega = minimizer_second(spec, N)
            return MinimizerResult(
                omega, uncertainty_second(omega), recurrence_residual_second(omega, spec.alpha)
            )
        raise ValueError(f"Unknown relation: {relation}")

    # -------------------------------------------------------------------------
    # Evolution
    # -------------------------------------------------------------------------

    def sample_evolution(
        self,
        u0: LatticeSeq,
        times: Sequence[float],
        method: Method = "spectral",
        closed_form: MinimizerSpec | None = None,
    ) -> list[EvolutionRecord]:
        """Evolve u0 to each time and summarize the state.

        When `closed_form` is given, u0 is taken to be that minimizer and the
        sup distance to its closed-form evolution is recorded.
        """
        reach = max((abs(t) for t in times), default=0.0)
        radius = padded_radius(u0.N, reach, u0.h)
        phi = PhiWeight.quadratic(u0.d, u0.h)

        def sample(t: float) -> EvolutionRecord:
            u = evolve_schrodinger(u0, t, method, radius)
            gap = None
            if closed_form is not None:
                exact = minimizer_at_time(closed_form, radius, t)
                gap = float(np.max(np.abs(u.values - exact.values)))
            return EvolutionRecord(
                t=float(t),
                norm=u.norm(),
                F=weighted_mass(u, phi),
                normalization=normalization_quantity(u),
                closed_form_gap=gap,
            )

        logger.info("Evolving to %d times...", len(times))
        return self._map(sample, list(times))

    def virial(
        self,
        u0: LatticeSeq,
        kind: str = "schrodinger",
        times: Sequence[float] | None = None,
        method: Method = "spectral",
    ) -> VirialTrace:
        """Virial trace for the Schrodinger flow or a coupled-system variant."""
        if kind == "schrodinger":
            return virial_trace_schrodinger(u0, times, method)
        return virial_trace_coupled(u0, CoupledVariant(kind), times)

    # -------------------------------------------------------------------------
    # Finite Sequences
    # -------------------------------------------------------------------------

    def finite_rows(
        self,
        case: FiniteCase,
        u0: Sequence[complex],
        times: Sequence[float] = (0.0,),
        expected: float | None = None,
    ) -> list[FiniteRecord]:
        """Finite Virial quantities of one initial datum at each time."""
        label = ",".join(_format_entry(c) for c in u0)

        def sample(t: float) -> FiniteRecord:
            s = finite_virial(case, u0, t)
            return FiniteRecord(
                variant=case.variant.value,
                N=case.N,
                h=case.h,
                u0=label,
                t=s.t,
                F=s.F,
                Fddot=s.Fddot,
                Fddot_closed=s.Fddot_closed,
                Fddot_expected=expected if t == 0 else None,
                Fdddot=s.Fdddot,
            )

        return self._map(sample, list(times))

    def finite_counterexamples(self, variant: Variant | None = None) -> list[FiniteRecord]:
        """F''(0) for the stored counterexamples, optionally of one variant."""
        rows: list[FiniteRecord] = []
        for example in COUNTEREXAMPLES:
            if variant is not None and example.variant is not variant:
                continue
            case = build_case(example.variant, example.N)
            rows.extend(self.finite_rows(case, example.u0, expected=example.fddot0))
        return rows

    def finite_minimizer(self, case: FiniteCase) -> FiniteMinimizerResult:
        """Solve for the minimizer by both methods and check equality."""
        linear = solve_minimizer(case, MinimizerMethod.LINEAR_SOLVE)
        continued = solve_minimizer(case, MinimizerMethod.CONTINUED_FRACTION)
        agreement = float(np.max(np.abs(linear.values - continued.values)))
        return FiniteMinimizerResult(
            linear, continued, uncertainty_finite(case, continued.values), agreement
        )

    # -------------------------------------------------------------------------
    # Convergence
    # -------------------------------------------------------------------------

    def gaussian_table(
        self, j_list: Sequence[int], grid: Sequence[float], d: int = 1
    ) -> list[ConvergenceRecord]:
        """Sup error of f_j against the Gaussian, one row per j."""
        logger.info("Gaussian convergence over %d levels...", len(j_list))
        summaries = self._map(lambda j: gaussian_sweep([j], grid, d)[0], list(j_list))
        return [
            ConvergenceRecord(
                j=s.j,
                sup_error=s.sup_error,
                worst_x=" ".join(_format_entry(x) for x in s.worst_x),
            )
            for s in summaries
        ]

    def profile_table(
        self, x_list: Sequence[float], L: float, j_list: Sequence[int], alpha: float = 1.0
    ) -> list[ProfileRecord]:
        """Finite DFT minimizers against the limit profile, one row per (x, j)."""
        pairs = [(x, j) for x in x_list for j in j_list]

        def evaluate(pair: tuple[float, int]) -> ProfileRecord:
            x, j = pair
            value, limit = dft_limit_profile(x, L, j, alpha)
            return ProfileRecord(x=x, j=j, value=value, limit=limit, error=abs(value - limit))

        return self._map(evaluate, pairs)

    def cf_limit_table(
        self, k: int, alpha: float, h: float, N_list: Sequence[int]
    ) -> list[CFLimitRecord]:
        """Dirichlet continued fractions against I_{k-1}/I_k."""
        return [
            CFLimitRecord(
                N=row.N,
                value=row.value,
                limit=row.limit,
                error=row.error,
                closed_form=row.closed_form,
            )
            for row in dirichlet_cf_limit(k, alpha, h, N_list)
        ]


def _format_entry(value: complex | float) -> str:
    number = complex(value)
    if number.imag == 0:
        return format(number.real, "g")
    return format(number, "g")
