"""Tests for lattice sequences, operators and the uncertainty relations."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from uncertainty_lab import (
    TAIL_TOL,
    DegenerateInputError,
    InvalidArgumentError,
    LatticeSeq,
    UnsupportedDimensionError,
    commutator_expectation,
    inner_product,
    normalization_quantity,
    op_backward_difference,
    op_forward_difference,
    op_laplacian,
    op_momentum,
    op_position,
    perturb_to_admissible,
    random_sequence,
    second_normalization_quantity,
    tail_bound,
    truncation_radius,
    uncertainty_main,
    uncertainty_second,
)
from uncertainty_lab.lattice import main_lhs_forms

finite_parts = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)
line_values = st.lists(
    st.builds(complex, finite_parts, finite_parts), min_size=1, max_size=9
).filter(lambda v: len(v) % 2 == 1)
meshes = st.sampled_from([0.25, 0.5, 1.0, 2.0])


class TestLatticeSeq:
    """Tests for construction, access and serialization."""

    def test_rejects_bad_dimension(self):
        """Dimensions outside 1..3 are rejected."""
        with pytest.raises(InvalidArgumentError):
            LatticeSeq.zeros(4, 1, 1.0)

    def test_rejects_nonpositive_mesh(self):
        """h must be positive."""
        with pytest.raises(InvalidArgumentError):
            LatticeSeq.zeros(1, 2, 0.0)

    def test_rejects_wrong_shape(self):
        """Values must cover the whole box."""
        with pytest.raises(InvalidArgumentError):
            LatticeSeq(1, 2, 1.0, np.ones(4))

    def test_rejects_non_finite(self):
        """NaN values are rejected."""
        with pytest.raises(InvalidArgumentError):
            LatticeSeq(1, 1, 1.0, np.array([0, np.nan, 0]))

    def test_values_are_read_only(self):
        """Stored values cannot be modified in place."""
        u = LatticeSeq.delta(1, 2, 1.0)
        with pytest.raises(ValueError):
            u.values[0] = 5

    def test_getitem_inside_and_outside(self):
        """Indexing is centered and zero outside the box."""
        u = LatticeSeq.from_values([1, 2, 3], 1.0)
        assert u[-1] == 1
        assert u[0] == 2
        assert u[5] == 0

    def test_getitem_wrong_dimension(self):
        """Index tuples must match d."""
        with pytest.raises(InvalidArgumentError):
            LatticeSeq.zeros(2, 1, 1.0)[0]

    def test_delta_off_box(self):
        """delta rejects indices outside the box."""
        with pytest.raises(InvalidArgumentError):
            LatticeSeq.delta(1, 1, 1.0, (2,))

    def test_from_values_even_length(self):
        """Arrays of even side cannot be centered."""
        with pytest.raises(InvalidArgumentError):
            LatticeSeq.from_values([1, 2], 1.0)

    def test_embed_and_crop(self, plane_sequence):
        """Embedding then cropping returns the original values."""
        grown = plane_sequence.embed(plane_sequence.N + 3)
        assert grown.norm_squared() == pytest.approx(plane_sequence.norm_squared())
        np.testing.assert_array_equal(grown.crop(plane_sequence.N).values, plane_sequence.values)

    def test_embed_smaller_radius(self, line_sequence):
        """Embedding cannot shrink the box."""
        with pytest.raises(InvalidArgumentError):
            line_sequence.embed(line_sequence.N - 1)

    def test_norm_uses_mesh_weight(self):
        """||u||^2 = h^d sum |u_k|^2."""
        u = LatticeSeq(2, 1, 0.5, np.ones((3, 3)))
        assert u.norm_squared() == pytest.approx(0.25 * 9)

    def test_dict_round_trip(self, plane_sequence):
        """to_dict and from_dict preserve every field."""
        restored = LatticeSeq.from_dict(plane_sequence.to_dict())
        assert (restored.d, restored.N, restored.h) == (2, 4, 0.5)
        np.testing.assert_array_equal(restored.values, plane_sequence.values)

    def test_from_dict_missing_field(self):
        """Missing keys raise InvalidArgumentError."""
        with pytest.raises(InvalidArgumentError):
            LatticeSeq.from_dict({"d": 1, "N": 1})

    def test_from_dict_wrong_length(self):
        """Value count must match (2N+1)^d."""
        with pytest.raises(InvalidArgumentError):
            LatticeSeq.from_dict({"d": 1, "N": 1, "h": 1.0, "re": [1, 2]})

    def test_random_sequence_is_seeded(self):
        """The same seed gives the same datum."""
        first = random_sequence(np.random.default_rng(3), 1, 5, 1.0)
        second = random_sequence(np.random.default_rng(3), 1, 5, 1.0)
        np.testing.assert_array_equal(first.values, second.values)


class TestOperators:
    """Tests for position, momentum and difference operators."""

    def test_position_multiplies_by_kh(self):
        """(S_1 u)_k = k h u_k."""
        u = LatticeSeq.from_values([1, 1, 1], 0.5)
        np.testing.assert_allclose(op_position(u)[0].values, [-0.5, 0, 0.5])

    def test_momentum_of_delta(self, delta):
        """A_h delta_0 = (delta_{-1} - delta_1) / 2h."""
        np.testing.assert_allclose(op_momentum(delta)[0].values, [0.5, 0, -0.5])

    def test_momentum_is_skew_adjoint(self, rng):
        """<A u, v> = -<u, A v>."""
        u = random_sequence(rng, 1, 5, 0.5)
        v = random_sequence(rng, 1, 3, 0.5)
        left = inner_product(op_momentum(u)[0], v)
        right = -inner_product(u, op_momentum(v)[0])
        assert left == pytest.approx(right, abs=1e-12)

    def test_position_is_self_adjoint(self, plane_sequence, rng):
        """<S_j u, v> = <u, S_j v>."""
        v = random_sequence(rng, 2, 4, 0.5)
        for su, sv in zip(op_position(plane_sequence), op_position(v)):
            assert inner_product(su, v) == pytest.approx(inner_product(plane_sequence, sv), abs=1e-12)

    def test_laplacian_from_differences(self, line_sequence):
        """Delta = d^+ d^- on one axis."""
        laplacian = op_laplacian(line_sequence)
        composed = op_forward_difference(op_backward_difference(line_sequence, 0), 0)
        np.testing.assert_allclose(
            laplacian.values, composed.crop(laplacian.N).values, atol=1e-12
        )

    def test_laplacian_of_delta(self, delta):
        """Delta delta_0 = (delta_{-1} - 2 delta_0 + delta_1) / h^2."""
        np.testing.assert_allclose(op_laplacian(delta).values, [1, -2, 1])


class TestNormalizationQuantities:
    """Tests for the left sides of both relations."""

    def test_commutator_matches_closed_form(self, line_sequence):
        """<-[S,A]u,u> equals Re h sum u_k conj(u_{k+1})."""
        value = commutator_expectation(line_sequence)
        assert value.real == pytest.approx(normalization_quantity(line_sequence), rel=1e-12)
        assert abs(value.imag) < 1e-12

    def test_commutator_matches_closed_form_plane(self, plane_sequence):
        """The identity also holds on Z^2."""
        value = commutator_expectation(plane_sequence)
        assert value.real == pytest.approx(normalization_quantity(plane_sequence), rel=1e-12)

    def test_lhs_forms_agree(self, line_sequence, plane_sequence):
        """The neighbour and difference forms of the left side coincide."""
        for u in (line_sequence, plane_sequence):
            neighbour_form, difference_form = main_lhs_forms(u)
            assert neighbour_form == pytest.approx(difference_form, rel=1e-12)
            assert neighbour_form == pytest.approx(abs(normalization_quantity(u)), rel=1e-12)

    def test_second_quantity_is_imaginary(self, line_sequence):
        """h^2 sum (u_{k+1} - u_{k-1})/2 conj(u_k) has no real part."""
        value = second_normalization_quantity(line_sequence)
        assert abs(value.real) < 1e-12 * max(1.0, abs(value))
        assert abs(value.imag) > 0

    def test_delta_has_zero_quantity(self, delta):
        """An isolated spike has no nearest-neighbour correlation."""
        assert normalization_quantity(delta) == 0.0


class TestUncertaintyRelations:
    """Tests for uncertainty_main and uncertainty_second."""

    def test_zero_sequence_rejected(self):
        """The zero sequence has no ratio."""
        with pytest.raises(DegenerateInputError):
            uncertainty_main(LatticeSeq.zeros(1, 2, 1.0))

    def test_second_relation_needs_a_line(self, plane_sequence):
        """The second relation is one-dimensional."""
        with pytest.raises(UnsupportedDimensionError):
            uncertainty_second(plane_sequence)

    def test_report_factors(self, line_sequence):
        """a and b are the squared factors."""
        report = uncertainty_main(line_sequence)
        assert report.a == pytest.approx(report.pos_factor**2)
        assert report.b == pytest.approx(report.mom_factor**2)
        assert 0 < report.ratio <= 1

    def test_delta_is_degenerate(self, delta):
        """delta_0 has ||S u|| = 0, so the ratio is reported as degenerate."""
        report = uncertainty_main(delta)
        assert report.lhs == pytest.approx(0.0, abs=1e-15)
        assert report.degenerate
        assert report.ratio == 0.0
        assert not report.equality

    def test_shifted_delta_has_zero_lhs(self):
        """A spike off the origin has a bound but no left side."""
        report = uncertainty_main(LatticeSeq.delta(1, 2, 1.0, (1,)))
        assert not report.degenerate
        assert report.ratio == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.property
    @settings(max_examples=200, deadline=None)
    @given(line_values, meshes)
    def test_main_ratio_at_most_one(self, values, h):
        """Every nonzero datum satisfies the main inequality."""
        assume(any(abs(v) > 1e-3 for v in values))
        report = uncertainty_main(LatticeSeq.from_values(values, h))
        assert report.ratio <= 1 + 1e-12

    @pytest.mark.property
    @settings(max_examples=200, deadline=None)
    @given(line_values, meshes)
    def test_second_ratio_at_most_one(self, values, h):
        """Every nonzero datum satisfies the second inequality."""
        assume(any(abs(v) > 1e-3 for v in values))
        report = uncertainty_second(LatticeSeq.from_values(values, h))
        assert report.ratio <= 1 + 1e-12

    @pytest.mark.property
    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1), st.sampled_from([1, 2, 3]))
    def test_random_data_in_every_dimension(self, seed, d):
        """Seeded random data in d = 1..3 stay below the bound."""
        u = random_sequence(np.random.default_rng(seed), d, 3, 0.5)
        assert uncertainty_main(u).ratio <= 1 + 1e-12


class TestAdmissibility:
    """Tests for perturb_to_admissible."""

    @pytest.mark.parametrize("h", [0.5, 1.0])
    def test_delta_becomes_admissible(self, h):
        """A spike gains a neighbour at distance exactly eps."""
        u = LatticeSeq.delta(1, 0, h)
        eps = 1e-3
        moved = perturb_to_admissible(u, eps)
        assert moved.N == 1
        assert normalization_quantity(moved) > 0
        gap = moved.with_values(moved.values - u.embed(1).values)
        assert gap.norm() == pytest.approx(eps, rel=1e-12)

    def test_admissible_data_unchanged(self, line_sequence):
        """Data with a nonzero quantity are only embedded."""
        moved = perturb_to_admissible(line_sequence, 1e-3)
        np.testing.assert_array_equal(
            moved.crop(line_sequence.N).values, line_sequence.values
        )

    def test_rejects_zero_and_bad_eps(self, delta):
        """eps must be positive and u nonzero."""
        with pytest.raises(InvalidArgumentError):
            perturb_to_admissible(delta, 0.0)
        with pytest.raises(DegenerateInputError):
            perturb_to_admissible(LatticeSeq.zeros(1, 1, 1.0), 1e-3)

    def test_plane_spike(self):
        """Admissibility also works on Z^2."""
        moved = perturb_to_admissible(LatticeSeq.delta(2, 1, 1.0), 1e-2)
        assert normalization_quantity(moved) > 0


class TestTruncation:
    """Tests for tail_bound and truncation_radius."""

    @pytest.mark.parametrize("z,d", [(1.0, 1), (4.0, 1), (1.0, 2), (16.0, 3)])
    def test_radius_meets_tolerance(self, z, d):
        """The chosen radius is the first one below TAIL_TOL."""
        N = truncation_radius(z, d)
        assert tail_bound(z, N, d) < TAIL_TOL
        if N > 1:
            assert tail_bound(z, N - 1, d) >= TAIL_TOL

    def test_tail_decreases(self):
        """Larger boxes leave less mass outside."""
        tails = [tail_bound(2.0, N) for N in range(1, 8)]
        assert all(b < a for a, b in zip(tails, tails[1:]))

    def test_dimension_increases_tail(self):
        """The d-fold product leaves more mass outside than one axis."""
        assert tail_bound(1.0, 3, 2) > tail_bound(1.0, 3, 1)
