import json
import math

import numpy as np
import pytest

from core.cache import SpectrumCache, fingerprint
from core.grading import check, combine
from core.json_io import (
    ConfigParseError,
    build_run_config,
    dump_config,
    load_run_config,
    parse_summary,
    to_jsonable,
    write_summary,
)
from core.output import read_csv, write_csv
from core.schema import FermiParams, HardyParams, SummaryRecord
from pointgas.freefermi import cube_spectrum


def test_check_margin_and_tolerance():
    assert check("ok", 0.0).passed
    assert not check("short", -1e-9).passed
    assert check("within slack", -1e-9, tolerance=1e-8).passed
    assert not check("nan", math.nan).passed


def test_combine_scores():
    grade = combine([check("a", 1.0), check("b", -1.0)])
    assert not grade.passed
    assert grade.score == 0.5
    assert not combine([]).passed


def test_nan_margin_serialises_as_null():
    assert check("nan", math.nan).to_dict()["margin"] is None


def test_build_run_config_layers():
    config = build_run_config("fermi", {"beta": "1.0,2.0", "seed": "7"}, {"beta": "3.0", "q": None})
    assert config.seed == 7
    assert config.params["beta"] == [3.0]
    assert config.params["q"] == [2]
    assert isinstance(config.study_params(), FermiParams)


def test_none_text_clears_optional_parameter():
    config = build_run_config("hardy", {"c0": "none", "lemma": "ball"})
    params = config.study_params()
    assert isinstance(params, HardyParams)
    assert params.c0 is None
    assert params.lemma == "ball"


@pytest.mark.parametrize(
    "subcommand, layer",
    [
        ("fermi", {"bogus": "1"}),
        ("hardy", {"lemma": "sphere"}),
        ("nope", {}),
        ("fermi", {"subcommand": "ledger"}),
    ],
)
def test_build_run_config_rejects(subcommand, layer):
    with pytest.raises(ConfigParseError):
        build_run_config(subcommand, layer)


def test_config_file_round_trip(tmp_path):
    config = build_run_config("spectrum2", {"L": "1.5,2.0", "walls": "neumann", "cache_dir": str(tmp_path / "c")})
    path = dump_config(config, tmp_path / "spectrum2.config")
    assert path.read_text().startswith("subcommand = spectrum2\n")
    assert load_run_config(path) == config


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigParseError):
        load_run_config(tmp_path / "absent.config")


def test_to_jsonable():
    data = to_jsonable({"a": np.array([1.0, np.inf]), "b": np.int64(3), "c": (math.nan,)})
    assert data == {"a": [1.0, None], "b": 3, "c": [None]}
    json.dumps(data)


def test_summary_validation(tmp_path):
    config = build_run_config("fermi", {})
    record = SummaryRecord(config=config.model_dump(), passed=True, score=1.0)
    path = write_summary(tmp_path / "fermi.summary.json", record)
    assert parse_summary(path.read_text())["passed"] is True
    with pytest.raises(ConfigParseError):
        parse_summary({"passed": True})
    with pytest.raises(ConfigParseError):
        parse_summary("not json")


def test_csv_header_and_rows(tmp_path):
    rows = [{"kind": "a", "value": 0.1, "flag": True}, {"kind": "b", "extra": None, "value": math.inf}]
    path = write_csv(tmp_path / "out.csv", "fermi", rows)
    assert path.read_text().splitlines()[0] == "# pointgas-csv v1 fermi columns=kind,value,flag,extra"
    subcommand, parsed = read_csv(path)
    assert subcommand == "fermi"
    assert parsed[0] == {"kind": "a", "value": "0.1", "flag": "true", "extra": ""}
    assert parsed[1]["value"] == "inf"


def test_read_csv_rejects_foreign_files(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigParseError):
        read_csv(path)


def test_fingerprint_ignores_key_order():
    assert fingerprint("pair", {"L": 1.0, "cells": 3}) == fingerprint("pair", {"cells": 3, "L": 1.0})
    assert fingerprint("pair", {"L": 1.0}) != fingerprint("radial", {"L": 1.0})


def test_cache_round_trip(tmp_path):
    cache = SpectrumCache(tmp_path)
    spec = cube_spectrum(1.0, "neumann", 50.0, copies=2)
    key = {"L": 1.0, "bc": "neumann"}
    assert cache.get("cube", key) is None
    cache.put("cube", key, spec)
    hit = cache.get("cube", key)
    assert np.array_equal(hit.eigenvalues, spec.eigenvalues)
    assert np.array_equal(hit.multiplicities, spec.multiplicities)
    assert hit.copies == 2
    assert len(cache) == 1


def test_cache_computes_once(tmp_path):
    cache = SpectrumCache(tmp_path)
    calls = []

    def compute():
        calls.append(1)
        return cube_spectrum(1.0, "dirichlet", 100.0)

    first = cache.get_or_compute("cube", {"L": 1.0}, compute)
    second = cache.get_or_compute("cube", {"L": 1.0}, compute)
    assert len(calls) == 1
    assert np.array_equal(first.eigenvalues, second.eigenvalues)


def test_cache_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("POINTGAS_CACHE_DIR", str(tmp_path / "env"))
    cache = SpectrumCache()
    assert cache.path.parent == tmp_path / "env"
