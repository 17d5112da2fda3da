import csv
import io
import json
import math
import os
from dataclasses import replace

import pytest

from mdimlab.cli import main
from mdimlab.errors import ConfigError
from mdimlab.harness import (PRESETS, SCHEMA, config_text, load_config,
                             parse_list, parse_number, run_vp_check)


# ---------------------------------------------------------------- config parsing

def test_parse_number_powers():
    assert parse_number("2^-3") == 0.125
    assert parse_number(" 10 ^ 2 ") == 100.0
    assert parse_number("0.25") == 0.25
    with pytest.raises(ConfigError):
        parse_number("half")


def test_parse_list_mixed_separators():
    assert parse_list("2^-3, 2^-4 2^-5") == (0.125, 0.0625, 0.03125)
    assert parse_list("  ") == ()


def test_load_config_overrides_defaults():
    cfg = load_config(text="[system]\nm = 3\n[sweep]\nepsilons = 2^-2, 2^-3\n[run]\nseed = 11\n")
    assert cfg.m == 3 and cfg.seed == 11
    assert cfg.epsilons == (0.25, 0.125)
    assert cfg.family == PRESETS["finite-entropy"].family


def test_load_config_preset_base():
    cfg = load_config(text="[run]\npreset = example-3-5\nseed = 4\n")
    assert cfg.match_resolution == 2.0 and cfg.seed == 4
    assert cfg.mdim_range == (0.85, 1.05)


@pytest.mark.parametrize("text", [
    "[nosuch]\nx = 1\n",
    "[system]\nlevels = 3\n",
    "[system]\nm = three\n",
    "[system]\nm = 0\n",
    "[metric]\nbase = 1.5\n",
    "[metric]\nkind = manhattan\n",
    "[family]\nkind = gaussian\n",
    "[sweep]\nepsilons = 0.1, 0.2, 0.15\n",
    "[sweep]\nepsilons = 0.5, 2\n",
    "[estimators]\nkinds = katok-lower, magic\n",
    "[run]\npreset = nosuch\n",
    "[run]\njobs = 0\n",
    "not an ini file",
])
def test_load_config_rejects(text):
    with pytest.raises(ConfigError):
        load_config(text=text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.ini"))


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_config_text_round_trip(name):
    cfg = PRESETS[name]
    assert load_config(text=config_text(cfg)) == cfg


def test_example_metric_flag():
    assert PRESETS["finite-entropy"].example_metric
    assert not replace(PRESETS["finite-entropy"], base=0.25).example_metric
    assert not replace(PRESETS["finite-entropy"], sided="one-sided").example_metric


# ---------------------------------------------------------------- runs

@pytest.fixture(scope="module")
def finite_report():
    return run_vp_check(PRESETS["finite-entropy"])


def test_finite_entropy_preset_passes(finite_report):
    rep = finite_report
    assert rep.exit_code == 0
    assert abs(rep.geometric["slope"]) <= 0.05
    for kind, summary in rep.measure.items():
        assert abs(summary["slope"]) <= 0.05, kind
    names = {v.name for v in rep.verdicts}
    assert {"soundness", "order-swap"} <= names
    assert rep.checks and all(c.passed for c in rep.checks)


def test_report_schema(finite_report):
    d = json.loads(finite_report.to_json())
    assert d["schema"] == SCHEMA
    assert d["emptyFamily"] is False
    assert d["passed"] is True
    assert set(d["searches"]) == set(PRESETS["finite-entropy"].kinds)


def _numbers(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return
    if isinstance(obj, (int, float)):
        yield float(obj)
    elif isinstance(obj, dict):
        for v in obj.values():
            yield from _numbers(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _numbers(v)


def _csv_numbers(files):
    out = []
    for text in files.values():
        for row in csv.reader(io.StringIO(text)):
            for tok in row:
                tok = tok.split("=")[-1]
                try:
                    out.append(float(tok))
                except ValueError:
                    pass
    return out


def test_every_json_number_is_in_a_csv(finite_report):
    csv_vals = _csv_numbers(finite_report.csv_files())
    missing = [x for x in _numbers(finite_report.as_dict())
               if not any(math.isclose(x, y, rel_tol=1e-12, abs_tol=1e-15) for y in csv_vals)]
    assert missing == []


def test_write_report(tmp_path, finite_report):
    paths = finite_report.write(str(tmp_path))
    names = {os.path.basename(p) for p in paths}
    assert {"report.json", "verdicts.csv", "counts.csv", "search.csv"} <= names


def test_empty_family_skips_measure_verdicts():
    cfg = replace(PRESETS["finite-entropy"], family="empty", family_params=(), checks=())
    rep = run_vp_check(cfg)
    assert rep.empty_family
    for summary in rep.measure.values():
        assert summary["slope"] == 0.0
    d = rep.as_dict()
    assert d["emptyFamily"] is True
    assert d["verdicts"] == [] and d["passed"] is True


def test_order_swap_skipped_off_example_metric():
    cfg = replace(PRESETS["finite-entropy"], base=0.25, checks=(), kinds=("mrid-grid",))
    rep = run_vp_check(cfg)
    assert not any(v.name == "order-swap" for v in rep.verdicts)
    assert "skipped" in rep.as_dict()["orderSwapPrecondition"]


def test_jobs_do_not_change_results():
    base = replace(PRESETS["finite-entropy"], checks=(), kinds=("bk-lower", "katok-lower"))
    a = run_vp_check(base).as_dict()
    b = run_vp_check(replace(base, jobs=2)).as_dict()
    assert a == b


# ---------------------------------------------------------------- CLI

def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_cli_missing_config_exit_2(tmp_path):
    code, _, err = _run(["mdim", "--config", str(tmp_path / "nope.ini")])
    assert code == 2 and "not found" in err


def test_cli_unknown_subcommand_exit_2():
    assert _run(["frobnicate"])[0] == 2
    assert _run([])[0] == 2


def test_cli_bad_seed_exit_2():
    assert _run(["mdim", "--seed", "-1"])[0] == 2


def test_cli_mdim_deterministic(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[system]\nm = 2\n[sweep]\nmdim_epsilons = 2^-2, 2^-3, 2^-4\n")
    a = _run(["mdim", "--config", str(cfg), "--seed", "7"])
    b = _run(["mdim", "--config", str(cfg), "--seed", "7"])
    assert a[0] == 0 and a == b
    assert a[1].startswith("quantity,epsilon,value\n")


def test_cli_bk_jobs_invariant():
    a = _run(["bk", "--seed", "3", "--jobs", "1"])
    b = _run(["bk", "--seed", "3", "--jobs", "2"])
    assert a[0] == 0 and a[1] == b[1]


def test_cli_json_format_and_out_dir(tmp_path):
    code, text, _ = _run(["mrid", "--format", "json"])
    assert code == 0
    recs = json.loads(text)["records"]
    assert len(recs) == len(PRESETS["finite-entropy"].family_params)
    for r in recs:
        assert r["value"] == pytest.approx(0.0, abs=1e-9)
    code, text, _ = _run(["rdist", "--out", str(tmp_path)])
    assert code == 0 and text == ""
    assert (tmp_path / "rd.csv").exists() and (tmp_path / "report.json").exists()


def test_cli_vp_check_finite_entropy():
    code, text, _ = _run(["vp-check"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows and all(r["passed"] == "true" for r in rows)


def test_cli_verdict_failure_exit_1(tmp_path):
    # a tolerance no finite-sample estimator can meet
    cfg = tmp_path / "strict.ini"
    cfg.write_text("[estimators]\nkinds = bk-lower\n[tolerance]\nsoundness = -1\n[run]\nchecks = prop\n")
    assert _run(["vp-check", "--config", str(cfg)])[0] == 1


def test_cli_too_few_scales_exit_1(tmp_path):
    cfg = tmp_path / "short.ini"
    cfg.write_text("[sweep]\nmdim_epsilons = 2^-2, 2^-3\n")
    code, _, err = _run(["mdim", "--config", str(cfg)])
    assert code == 1 and "InsufficientData" in err


def test_readme_sample_config_loads():
    import re
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    with open(os.path.join(root, "README.md"), encoding="utf-8") as fh:
        block = re.search(r"```ini\n(.*?)```", fh.read(), re.S).group(1)
    cfg = load_config(text=block)
    assert cfg.m == 2 and cfg.family_params == (0.5, 0.7, 0.9)
    assert cfg.kinds == ("mrid-grid", "rd-linf", "katok-lower", "katok-upper", "bk-lower", "bk-upper")
