import json
import math

import pytest

import main
from core.json_io import build_run_config
from core.output import read_csv
from core.runner import aggregate_results, run_study
from studies.spectrum2.run import spinless_reference_level

_FERMI_FLAGS = ["--beta", "0.5,2.0", "--rho", "1.0", "--q", "1,2", "--oracle-modes", "8"]


def test_fermi_cli_passes_and_writes_outputs(tmp_path):
    out = tmp_path / "out"
    assert main.main(["fermi", *_FERMI_FLAGS, "--out", str(out)]) == main.EXIT_PASSED
    subcommand, rows = read_csv(out / "fermi.csv")
    assert subcommand == "fermi"
    assert {row["kind"] for row in rows} == {"density", "zero_temperature", "oracle"}
    summary = json.loads((out / "fermi.summary.json").read_text())
    assert summary["passed"] is True
    assert summary["config"]["params"]["oracle_modes"] == 8


def test_dumped_config_reproduces_the_run(tmp_path):
    first = tmp_path / "first"
    main.main(["fermi", *_FERMI_FLAGS, "--out", str(first)])
    second = tmp_path / "second"
    code = main.main(["fermi", "--config", str(first / "fermi.config"), "--out", str(second)])
    assert code == main.EXIT_PASSED
    assert (first / "fermi.csv").read_text() == (second / "fermi.csv").read_text()


def test_unknown_config_key_is_an_error(tmp_path):
    path = tmp_path / "bad.config"
    path.write_text("subcommand = fermi\nbogus = 1\n")
    assert main.main(["fermi", "--config", str(path), "--out", str(tmp_path)]) == main.EXIT_ERROR


def test_config_for_another_study_is_an_error(tmp_path):
    path = tmp_path / "ledger.config"
    path.write_text("subcommand = ledger\n")
    assert main.main(["fermi", "--config", str(path), "--out", str(tmp_path)]) == main.EXIT_ERROR


def test_literal_flags_are_restricted():
    with pytest.raises(SystemExit):
        main.build_parser().parse_args(["hardy", "--lemma", "sphere"])


def test_hardy_frontier_table(tmp_path):
    layer = {"lemma": "ball", "cells": "4,6", "frontier_c0": "2.0,4.0", "out": str(tmp_path)}
    result = run_study(build_run_config("hardy", layer))
    assert result.error is None
    subcommand, rows = read_csv(tmp_path / "hardy_frontier.csv")
    assert subcommand == "hardy"
    assert [float(row["c0"]) for row in rows] == [2.0, 4.0]
    assert {float(row["c1"]) for row in rows} == {4.5}


def test_hardy_box_study_bounds_exterior_points(tmp_path):
    layer = {"lemma": "box", "cells": "4,6", "samples": "12", "out": str(tmp_path)}
    result = run_study(build_run_config("hardy", layer))
    assert result.error is None
    _, rows = read_csv(tmp_path / "hardy.csv")
    assert sum(row["kind"] == "projected" for row in rows) == 4
    projection = [c for c in result.grade.checks if "projection" in c.name]
    assert len(projection) == 4
    assert all(c.passed for c in projection)


def test_spectrum2_grades_both_resolutions(tmp_path):
    layer = {"L": "1.5,2.0", "beta": "1.0,2.0", "cells": "2,3", "out": str(tmp_path / "out"),
             "cache_dir": str(tmp_path / "cache")}
    result = run_study(build_run_config("spectrum2", layer))
    assert result.error is None
    bounded = [c for c in result.grade.checks if c.name.startswith("F_g <= F")]
    assert {c.name.rsplit("=", 1)[1] for c in bounded} == {"2", "3"}
    assert all(c.passed for c in bounded)
    _, rows = read_csv(tmp_path / "out" / "spectrum2_spinless.csv")
    assert {row["quantity"] for row in rows} == {"ground_level", "free_energy"}


def test_spinless_reference_level():
    assert spinless_reference_level(1.0, "dirichlet") == pytest.approx(9 * math.pi**2)
    assert spinless_reference_level(2.0, "neumann") == pytest.approx(math.pi**2 / 4)


def test_twobody_study_uses_the_cache(tmp_path):
    layer = {"cells": "100,200", "modes": "3", "out": str(tmp_path / "out"), "cache_dir": str(tmp_path / "cache")}
    config = build_run_config("twobody", layer)
    first = run_study(config)
    assert first.error is None
    assert first.passed, [c.name for c in first.grade.checks if not c.passed]
    again = run_study(config)
    assert again.passed
    assert (tmp_path / "cache" / "spectra.duckdb").is_file()


def test_library_errors_become_error_results(tmp_path):
    config = build_run_config("twobody", {"cells": "8", "modes": "5", "out": str(tmp_path), "cache_dir": str(tmp_path)})
    result = run_study(config)
    assert result.error is not None
    assert result.error.startswith("InvalidArgumentError")
    summary = aggregate_results([result])
    assert summary["errors"] == 1
    assert summary["failed"] == 0


@pytest.mark.slow
@pytest.mark.parametrize("study", ["fermi", "hardy", "twobody", "spectrum2", "occupations", "ledger"])
def test_default_studies_pass(study, tmp_path):
    config = build_run_config(study, {"out": str(tmp_path / "out"), "cache_dir": str(tmp_path / "cache")})
    result = run_study(config)
    assert result.error is None
    assert result.passed, [c.name for c in result.grade.checks if not c.passed]
