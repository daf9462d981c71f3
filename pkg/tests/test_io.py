"""Tests for export, parsing helpers and the service layer."""

import json
import threading
import time

import numpy as np
import pytest

from uncertainty_lab import (
    InvalidArgumentError,
    LabService,
    LatticeSeq,
    MinimizerSpec,
    Variant,
    build_case,
    case_from_json,
    case_to_json,
    export_csv,
    export_json,
    export_plot_data,
    get_max_workers,
    parse_complex_list,
    parse_float_list,
    parse_int_list,
    parse_range,
    sequence_from_json,
    sequence_to_json,
    validate_output_path,
)


class TestExportCsv:
    """Tests for CSV export."""

    def test_header_and_rows(self):
        """Columns come first, then one line per row."""
        text = export_csv([{"a": 1, "b": 2.5}], ["a", "b"])
        assert text == "a,b\n1,2.5\n"

    def test_full_precision(self):
        """Floats round-trip through the CSV text."""
        value = 1 / 3
        text = export_csv([{"x": value}], ["x"])
        assert float(text.splitlines()[1]) == value

    def test_bools_and_missing(self):
        """Booleans are lowercase and None is empty."""
        text = export_csv([{"ok": True, "gap": None}, {"ok": np.bool_(False)}], ["ok", "gap"])
        assert text.splitlines()[1:] == ["true,", "false,"]

    def test_no_rows(self):
        """An empty table still has its header."""
        assert export_csv([], ["t", "F"]) == "t,F\n"


class TestExportJson:
    """Tests for JSON export."""

    def test_envelope(self):
        """Every document carries schema and kind."""
        data = json.loads(export_json("verify", {"rows": []}))
        assert data == {"schema": 1, "kind": "verify", "rows": []}

    def test_numpy_values(self):
        """numpy scalars and arrays become plain JSON."""
        data = json.loads(export_json("x", {"a": np.float64(0.5), "b": np.arange(3)}))
        assert data["a"] == 0.5
        assert data["b"] == [0, 1, 2]

    def test_complex_values(self):
        """Complex numbers are written as {re, im}."""
        data = json.loads(export_json("x", {"z": 1 - 2j}))
        assert data["z"] == {"re": 1.0, "im": -2.0}

    def test_deterministic(self):
        """The same payload gives the same bytes."""
        payload = {"summary": {"ratio": 0.25}, "rows": [{"t": 0.0}]}
        assert export_json("virial", payload) == export_json("virial", payload)


class TestPlotData:
    """Tests for two-column plot files."""

    def test_columns(self):
        """One header line, then x y per line."""
        text = export_plot_data([(0, 1.5), (1, 0.25)], header="F")
        assert text.splitlines() == ["# F", "0 1.5", "1 0.25"]

    def test_without_header(self):
        """The header is optional."""
        assert export_plot_data([(2, 3)]) == "2 3\n"


class TestSequenceJson:
    """Tests for sequence and case descriptors."""

    def test_sequence_round_trip(self, plane_sequence):
        """A sequence survives JSON exactly."""
        restored = sequence_from_json(sequence_to_json(plane_sequence))
        assert (restored.d, restored.N, restored.h) == (2, 4, 0.5)
        np.testing.assert_array_equal(restored.values, plane_sequence.values)

    def test_sequence_schema(self):
        """The descriptor names its schema."""
        data = json.loads(sequence_to_json(LatticeSeq.delta(1, 1, 1.0)))
        assert data["schema"] == 1
        assert data["re"] == [0.0, 1.0, 0.0]

    def test_missing_imaginary_part(self):
        """im defaults to zeros."""
        u = sequence_from_json('{"d": 1, "N": 1, "h": 1.0, "re": [1, 2, 1]}')
        np.testing.assert_array_equal(u.values, [1, 2, 1])

    @pytest.mark.parametrize(
        "text",
        [
            "not json",
            "[1, 2, 3]",
            '{"schema": 2, "d": 1, "N": 0, "h": 1, "re": [1]}',
            '{"d": 1, "N": 1, "h": 1.0, "re": [1, 2]}',
            '{"d": 1, "h": 1.0, "re": [1]}',
        ],
    )
    def test_malformed_sequence(self, text):
        """Broken descriptors are invalid arguments."""
        with pytest.raises(InvalidArgumentError):
            sequence_from_json(text)

    def test_case_round_trip(self):
        """A case is rebuilt with its matrices."""
        case = build_case(Variant.DFT, 5, 0.5, 2.0)
        restored = case_from_json(case_to_json(case))
        assert restored == case
        np.testing.assert_array_equal(restored.A, case.A)

    def test_malformed_case(self):
        """A case needs its variant and N."""
        with pytest.raises(InvalidArgumentError):
            case_from_json('{"N": 3}')
        with pytest.raises(InvalidArgumentError):
            case_from_json('{"variant": "neumann", "N": 3}')


class TestParsers:
    """Tests for the (value, error) parsers."""

    def test_float_list(self):
        """Comma lists become floats."""
        assert parse_float_list("0, 0.25,1") == ([0.0, 0.25, 1.0], None)

    @pytest.mark.parametrize("value", ["", "1,x", "1,inf"])
    def test_float_list_errors(self, value):
        """Empty, non-numeric and infinite entries fail."""
        values, error = parse_float_list(value)
        assert values is None
        assert error

    def test_int_list(self):
        """Positive integers only."""
        assert parse_int_list("8,16") == ([8, 16], None)
        assert parse_int_list("8,-1")[0] is None
        assert parse_int_list("1.5")[0] is None

    def test_complex_list(self):
        """Python complex literals are accepted."""
        assert parse_complex_list("0,1+2j,-1j") == ([0j, 1 + 2j, -1j], None)
        assert parse_complex_list("1+")[0] is None

    def test_range(self):
        """start:stop:count gives evenly spaced points."""
        values, error = parse_range("0:2:5")
        assert error is None
        assert values == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])

    def test_range_single_point(self):
        """count 1 gives the start."""
        assert parse_range("3:7:1") == ([3.0], None)

    def test_range_falls_back_to_list(self):
        """Plain lists are accepted too."""
        assert parse_range("0,1.5") == ([0.0, 1.5], None)

    @pytest.mark.parametrize("value", ["0:1:0", "a:1:3", "0:inf:3"])
    def test_range_errors(self, value):
        """Bad ranges report an error."""
        values, error = parse_range(value)
        assert values is None
        assert error


class TestValidateOutputPath:
    """Tests for output path validation."""

    def test_valid(self, tmp_path):
        """A writable directory with the right extension passes."""
        assert validate_output_path(str(tmp_path / "a.csv"), [".csv"]) == (True, "")

    def test_extension(self, tmp_path):
        """The extension must be allowed."""
        is_valid, error = validate_output_path(str(tmp_path / "a.txt"), [".csv", ".json"])
        assert not is_valid
        assert "extension" in error

    def test_system_directory(self):
        """System directories are refused."""
        is_valid, error = validate_output_path("/etc/ratios.csv")
        assert not is_valid
        assert "system directory" in error

    def test_empty(self):
        """An empty path is refused."""
        assert validate_output_path("")[0] is False


class TestMaxWorkers:
    """Tests for the worker pool size."""

    def test_default(self, monkeypatch):
        """Without the variable the default is 4."""
        monkeypatch.delenv("UNCERTAINTY_LAB_THREADS", raising=False)
        assert get_max_workers() == 4

    def test_from_environment(self, monkeypatch):
        """UNCERTAINTY_LAB_THREADS sets the size."""
        monkeypatch.setenv("UNCERTAINTY_LAB_THREADS", "7")
        assert get_max_workers() == 7
        assert LabService().max_workers == 7

    @pytest.mark.parametrize("raw", ["zero", "0", "-2"])
    def test_invalid_values(self, monkeypatch, caplog, raw):
        """Invalid values fall back with a warning."""
        monkeypatch.setenv("UNCERTAINTY_LAB_THREADS", raw)
        assert get_max_workers() == 4
        assert "Ignoring" in caplog.text


class TestLabService:
    """Tests for the service layer."""

    def test_map_keeps_order(self):
        """Results come back in input order whatever finishes first."""
        service = LabService(max_workers=4)

        def slow_for_small(x):
            time.sleep(0.01 * (5 - x))
            return x * x

        assert service._map(slow_for_small, [0, 1, 2, 3, 4]) == [0, 1, 4, 9, 16]

    def test_map_uses_threads(self):
        """More than one worker thread runs."""
        service = LabService(max_workers=4)
        barrier = threading.Barrier(2, timeout=5)

        def wait(_):
            barrier.wait()
            return threading.get_ident()

        assert len(set(service._map(wait, [0, 1]))) == 2

    def test_single_worker_runs_inline(self):
        """One worker means no pool."""
        service = LabService(max_workers=1)
        assert service._map(lambda _: threading.get_ident(), [0, 1, 2]) == [
            threading.get_ident()
        ] * 3

    def test_random_sequences_are_seeded(self):
        """The same seed gives the same data in the same order."""
        service = LabService(max_workers=2)
        first = service.random_sequences(3, seed=11, d=2, N=3, h=0.5)
        second = service.random_sequences(3, seed=11, d=2, N=3, h=0.5)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.values, b.values)
        assert not np.array_equal(first[0].values, first[1].values)

    def test_verify_sequences(self, line_sequence, delta):
        """Reports are indexed and the delta is degenerate."""
        rows = LabService(max_workers=2).verify_sequences([line_sequence, delta])
        assert [r["index"] for r in rows] == [0, 1]
        assert rows[0]["ratio"] <= 1
        assert rows[1]["degenerate"]

    def test_unknown_relation(self, line_sequence):
        """Only main and second exist."""
        with pytest.raises(ValueError):
            LabService(max_workers=1).verify_sequences([line_sequence], "third")

    def test_build_minimizer(self, unit_spec):
        """The service minimizer attains equality."""
        result = LabService(max_workers=1).build_minimizer(unit_spec)
        assert result.report.equality
        assert result.residual < 1e-11

    def test_sample_evolution(self):
        """Closed-form gaps are small and the norm is kept."""
        spec = MinimizerSpec(alpha=1.0, h=0.5)
        service = LabService(max_workers=2)
        u0 = service.build_minimizer(spec).sequence
        rows = service.sample_evolution(u0, [0.0, 1.0], closed_form=spec)
        assert max(r["closed_form_gap"] for r in rows) < 1e-9
        assert rows[1]["norm"] == pytest.approx(rows[0]["norm"], rel=1e-12)

    def test_finite_counterexamples_filter(self):
        """Filtering by variant keeps only that variant."""
        rows = LabService(max_workers=1).finite_counterexamples(Variant.PERIODIC)
        assert [r["Fddot_expected"] for r in rows] == [8.0, -12.0]

    def test_finite_rows_label(self):
        """The datum is written as a compact label."""
        case = build_case(Variant.PERIODIC, 3)
        rows = LabService(max_workers=1).finite_rows(case, [0, 1, 0, 0, 0, 1j, 0], [0.0, 0.5])
        assert rows[0]["u0"] == "0,1,0,0,0,0+1j,0"
        assert rows[1]["Fddot_expected"] is None

    def test_cf_limit_table(self):
        """Closed forms are reported up to N = 12 only."""
        rows = LabService(max_workers=1).cf_limit_table(1, 1.0, 1.0, [4, 20])
        assert rows[0]["closed_form"] is not None
        assert rows[1]["closed_form"] is None
        assert rows[1]["error"] < rows[0]["error"]

    def test_sequence_values_are_read_only(self, line_sequence):
        """Service inputs cannot be modified in place."""
        assert isinstance(line_sequence, LatticeSeq)
        with pytest.raises(ValueError):
            line_sequence.values[0] = 0
