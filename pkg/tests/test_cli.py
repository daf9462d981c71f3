"""Tests for the uncertainty-lab command line."""

import csv
import io
import json
import logging

import pytest

from uncertainty_lab import (
    LabService,
    RunConfig,
    __version__,
    create_parser,
    get_logger,
    main,
    run,
    sequence_to_json,
)
from uncertainty_lab.lattice import LatticeSeq


def _csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(autouse=True)
def cli_environment(monkeypatch):
    """Keep worker pools small and drop the CLI log handler afterwards."""
    monkeypatch.setenv("UNCERTAINTY_LAB_THREADS", "2")
    yield
    logging.getLogger("uncertainty_lab").handlers.clear()
    logging.getLogger("py.warnings").handlers.clear()
    logging.getLogger("py.warnings").propagate = True
    logging.captureWarnings(False)


class TestParser:
    """Tests for argument parsing."""

    def test_no_command_prints_help(self, capsys):
        """Without a subcommand the help is shown and 0 returned."""
        assert main([]) == 0
        assert "uncertainty-lab" in capsys.readouterr().out

    def test_version(self, capsys):
        """--version prints the package version."""
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_subcommands(self):
        """All six subcommands are registered."""
        parser = create_parser()
        for command in ("verify", "minimizer", "evolve", "virial", "finite", "converge"):
            args = parser.parse_args([command])
            assert args.command == command

    def test_bad_choice_exits(self):
        """argparse rejects unknown choices with exit code 2."""
        with pytest.raises(SystemExit) as excinfo:
            main(["finite", "--variant", "neumann"])
        assert excinfo.value.code == 2

    def test_run_config_drops_run_flags(self):
        """RunConfig keeps only subcommand parameters."""
        args = create_parser().parse_args(["-v", "verify", "--random"])
        config = RunConfig.from_namespace(args)
        assert config.command == "verify"
        assert "verbose" not in config.params
        assert "func" not in config.params
        assert config.params["random"] is True

    def test_unknown_command_in_run(self, caplog):
        """run() rejects commands it does not know."""
        assert run(RunConfig(command="plot")) == 2
        assert "Unknown command" in caplog.text


class TestVerifyCommand:
    """Tests for the verify subcommand."""

    def test_random_sequences(self, capsys):
        """100 seeded sequences all satisfy the bound."""
        assert main(["verify", "--random", "--seed", "7", "--count", "100", "--format", "csv"]) == 0
        rows = _csv_rows(capsys.readouterr().out)
        assert len(rows) == 100
        assert all(float(r["ratio"]) <= 1 for r in rows)
        assert {r["equality"] for r in rows} == {"false"}

    def test_seeded_output_is_reproducible(self, capsys):
        """Two runs with the same seed print identical bytes."""
        argv = ["verify", "--random", "--seed", "3", "--count", "20", "--format", "json"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first

    def test_json_summary(self, capsys):
        """JSON output carries schema, kind and summary."""
        main(["verify", "--random", "--count", "5", "--format", "json"])
        data = json.loads(capsys.readouterr().out)
        assert data["schema"] == 1
        assert data["kind"] == "verify"
        assert data["summary"]["all_within_bound"] is True
        assert len(data["rows"]) == 5

    def test_list_input(self, capsys):
        """A comma-separated datum is checked."""
        assert main(["verify", "--u0", "1,2,1", "--format", "csv"]) == 0
        rows = _csv_rows(capsys.readouterr().out)
        assert len(rows) == 1

    def test_second_relation(self, capsys):
        """--relation second checks the second inequality."""
        assert main(["verify", "--u0", "1,2j,1", "--relation", "second", "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["summary"]["relation"] == "second"

    def test_file_input(self, tmp_path, capsys):
        """Sequences are read from JSON files."""
        path = tmp_path / "u.json"
        path.write_text(sequence_to_json(LatticeSeq.from_values([1, 1j, 1], 0.5)))
        assert main(["verify", "--input", str(path), "--format", "csv"]) == 0
        assert len(_csv_rows(capsys.readouterr().out)) == 1

    def test_even_list_rejected(self, caplog):
        """An even number of values cannot be centered."""
        assert main(["verify", "--u0", "1,2"]) == 2
        assert "odd number" in caplog.text

    def test_negative_mesh_rejected(self, caplog):
        """--h must be positive."""
        assert main(["verify", "--u0", "1,2,1", "--h", "-1"]) == 2
        assert "--h" in caplog.text

    def test_zero_count_rejected(self, caplog):
        """--random needs at least one sequence."""
        assert main(["verify", "--random", "--count", "0"]) == 2
        assert "--count must be at least 1" in caplog.text

    def test_missing_datum(self, caplog):
        """verify needs some input."""
        assert main(["verify"]) == 2

    def test_zero_datum(self):
        """The zero sequence is an invalid argument."""
        assert main(["verify", "--u0", "0,0,0"]) == 2

    def test_table_output(self, capsys):
        """The default output is a table with a summary."""
        main(["verify", "--u0", "1,2,1"])
        out = capsys.readouterr().out
        assert "ratio" in out
        assert "max_ratio" in out


class TestMinimizerCommand:
    """Tests for the minimizer subcommand."""

    def test_equality(self, capsys):
        """The minimizer attains equality."""
        assert main(["minimizer", "--alpha", "2", "--h", "0.5", "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["summary"]["equality"] is True
        assert abs(data["summary"]["ratio"] - 1) < 1e-9
        assert data["sequence"]["d"] == 1

    def test_plane_rows(self, capsys):
        """On Z^2 the rows carry two index columns."""
        main(["minimizer", "--d", "2", "--format", "csv"])
        rows = _csv_rows(capsys.readouterr().out)
        assert set(rows[0]) == {"k0", "k1", "re", "im"}

    def test_truncation_is_numerical(self, caplog):
        """A box that is too small is a numerical failure."""
        assert main(["minimizer", "--N", "1"]) == 3
        assert "Numerical failure" in caplog.text

    def test_plot_files(self, tmp_path, capsys):
        """--plot-dir writes a two-column file."""
        assert main(["minimizer", "--plot-dir", str(tmp_path), "--format", "csv"]) == 0
        lines = (tmp_path / "minimizer.dat").read_text().splitlines()
        assert lines[0] == "# minimizer"
        assert len(lines[1].split()) == 2


class TestEvolveAndVirialCommands:
    """Tests for the evolve and virial subcommands."""

    def test_evolve_closed_form(self, capsys):
        """The evolved minimizer tracks its closed form."""
        assert main(["evolve", "--t", "0,0.5,1", "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["summary"]["max_closed_form_gap"] < 1e-9
        assert [r["t"] for r in data["rows"]] == [0.0, 0.5, 1.0]

    def test_evolve_random_kernel(self, capsys):
        """Random data with the kernel propagator keep their norm."""
        main(["evolve", "--init", "random", "--method", "kernel", "--t", "0:1:3", "--format", "json"])
        rows = json.loads(capsys.readouterr().out)["rows"]
        assert rows[-1]["norm"] == pytest.approx(rows[0]["norm"], rel=1e-10)
        assert rows[0]["closed_form_gap"] is None

    def test_virial_minimizer(self, capsys):
        """For the minimizer a b = 1."""
        assert main(["virial", "--alpha", "1", "--h", "1", "--d", "1", "--format", "json"]) == 0
        summary = json.loads(capsys.readouterr().out)["summary"]
        assert abs(summary["a_b"] - 1) < 1e-8

    def test_virial_coupled(self, capsys):
        """Coupled variants report their hypothesis drift."""
        argv = ["virial", "--init", "random", "--system", "alternating", "--format", "json"]
        assert main(argv) == 0
        summary = json.loads(capsys.readouterr().out)["summary"]
        assert summary["a_b"] >= 1 - 1e-9
        assert summary["hypothesis_drift"] < 1e-10

    def test_virial_delta_is_numerical(self):
        """A spike cannot be normalized."""
        assert main(["virial", "--init", "delta"]) == 3

    def test_list_needs_u0(self, caplog):
        """--init list needs --u0."""
        assert main(["evolve", "--init", "list"]) == 2
        assert "--u0" in caplog.text

    def test_bad_times(self):
        """Unparseable times are invalid."""
        assert main(["evolve", "--t", "soon"]) == 2


class TestFiniteCommand:
    """Tests for the finite subcommand."""

    def test_periodic_example(self, capsys):
        """delta_{-2} + delta_2 on the periodic case has F''(0) = 8."""
        argv = ["finite", "--variant", "periodic", "--N", "3", "--u0", "0,1,0,0,0,1,0", "--format", "csv"]
        assert main(argv) == 0
        rows = _csv_rows(capsys.readouterr().out)
        assert abs(float(rows[0]["Fddot"]) - 8) < 1e-9
        assert abs(float(rows[0]["Fddot_closed"]) - 8) < 1e-9

    def test_counterexamples(self, capsys):
        """Without data the stored counterexamples are shown."""
        assert main(["finite", "--format", "json"]) == 0
        rows = json.loads(capsys.readouterr().out)["rows"]
        assert [r["Fddot_expected"] for r in rows] == [8.0, -12.0, -12.0, 4.0]
        assert all(abs(r["Fddot"] - r["Fddot_expected"]) < 1e-9 for r in rows)

    def test_counterexamples_one_variant(self, capsys):
        """--variant filters the counterexamples."""
        main(["finite", "--variant", "dirichlet", "--format", "json"])
        rows = json.loads(capsys.readouterr().out)["rows"]
        assert {r["variant"] for r in rows} == {"dirichlet"}

    def test_minimizer(self, capsys):
        """Both methods agree and attain equality."""
        assert main(["finite", "--variant", "dft", "--N", "10", "--minimizer", "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["summary"]["agreement"] < 1e-9
        assert data["summary"]["equality"] is True
        assert data["case"]["variant"] == "dft"

    def test_too_small(self, caplog):
        """N = 1 is rejected."""
        assert main(["finite", "--variant", "periodic", "--N", "1", "--u0", "0,1,0"]) == 2

    def test_dirichlet_boundary(self, caplog):
        """Dirichlet data must vanish at the ends."""
        assert main(["finite", "--variant", "dirichlet", "--u0", "1,0,0,0,0,0,0"]) == 2
        assert "vanish" in caplog.text

    def test_data_need_variant(self):
        """--u0 without --variant is invalid."""
        assert main(["finite", "--u0", "0,1,0,0,0,1,0"]) == 2


class TestConvergeCommand:
    """Tests for the converge subcommand."""

    def test_gaussian(self, capsys):
        """The Gaussian table has one row per j."""
        assert main(["converge", "--j", "8,16", "--grid", "0:1:5"]) == 0
        out = capsys.readouterr().out
        assert "sup_error" in out

    def test_profile(self, capsys):
        """Profile rows cover every (x, j) pair."""
        main(["converge", "--kind", "profile", "--x", "1", "--j", "16,32", "--format", "csv"])
        rows = _csv_rows(capsys.readouterr().out)
        assert [int(r["j"]) for r in rows] == [16, 32]

    def test_cf(self, capsys):
        """Continued-fraction rows converge to the Bessel ratio."""
        assert main(["converge", "--kind", "cf", "--format", "csv"]) == 0
        rows = _csv_rows(capsys.readouterr().out)
        assert len(rows) == 3
        assert float(rows[-1]["error"]) < 1e-10
        assert rows[-1]["closed_form"] == ""

    def test_bad_j(self):
        """j must be positive integers."""
        assert main(["converge", "--j", "0,8"]) == 2


class TestOutputFiles:
    """Tests for -o and --format."""

    def test_csv_from_extension(self, tmp_path):
        """The format follows the --output extension."""
        path = tmp_path / "ratios.csv"
        assert main(["verify", "--random", "--count", "3", "-o", str(path)]) == 0
        assert len(_csv_rows(path.read_text())) == 3

    def test_json_from_extension(self, tmp_path):
        """A .json file gets JSON."""
        path = tmp_path / "minimizer.json"
        assert main(["minimizer", "-o", str(path)]) == 0
        assert json.loads(path.read_text())["kind"] == "minimizer"

    def test_extension_must_match_format(self, tmp_path, caplog):
        """--format csv cannot write a .txt file."""
        path = tmp_path / "out.txt"
        assert main(["verify", "--u0", "1,2,1", "--format", "csv", "-o", str(path)]) == 2
        assert not path.exists()

    def test_system_directory_refused(self, caplog):
        """-o cannot point into a system directory."""
        assert main(["verify", "--u0", "1,2,1", "-o", "/proc/ratios.csv"]) == 2
        assert "system directory" in caplog.text

    def test_missing_directory(self, tmp_path):
        """The parent directory must exist."""
        path = tmp_path / "missing" / "out.csv"
        assert main(["verify", "--u0", "1,2,1", "-o", str(path)]) == 2


class TestLogging:
    """Tests for verbosity flags."""

    def test_quiet_hides_info(self, capsys):
        """-q suppresses progress messages."""
        main(["-q", "verify", "--random", "--count", "2", "--format", "csv"])
        assert "Verifying" not in capsys.readouterr().err

    def test_default_shows_info(self, capsys):
        """Progress messages go to stderr by default."""
        main(["verify", "--random", "--count", "2", "--format", "csv"])
        assert "Verifying 2 sequences" in capsys.readouterr().err

    def test_verbose_prefixes_level(self, capsys):
        """-v shows debug messages tagged with level and module."""
        main(["-v", "minimizer", "--format", "csv"])
        assert "DEBUG [minimizer]:" in capsys.readouterr().err

    def test_cli_logs_through_package_logger(self, capsys):
        """setup_logging configures the logger get_logger returns."""
        main(["-q", "verify", "--u0", "1,2,1", "--format", "csv"])
        package_logger = get_logger()
        assert package_logger is logging.getLogger("uncertainty_lab")
        assert len(package_logger.handlers) == 1
        assert package_logger.level == logging.WARNING

    def test_run_with_service(self, capsys):
        """run() accepts an injected service."""
        config = RunConfig(
            command="verify",
            params={"random": True, "count": 2, "seed": 0, "d": 1, "N": 4, "h": 1.0,
                    "relation": "main", "format": "csv"},
        )
        assert run(config, LabService(max_workers=1)) == 0
        assert len(_csv_rows(capsys.readouterr().out)) == 2
