import csv
import io
import os
from dataclasses import fields

import pytest

from svf_toolkit.cli import EXIT_BAD_INPUT, EXIT_CONTRACT, EXIT_OK, main
from svf_toolkit.config import Settings, load_settings
from svf_toolkit.documents import load_document
from svf_toolkit.svf_engine import svf

FIXTURES = os.path.join(os.path.dirname(__file__), os.pardir, "fixtures")


def fixture(name):
    return os.path.join(FIXTURES, name)


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("SVF_SEED", "SVF_TRIALS", "SVF_STEPS", "SVF_WORKERS", "SVF_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


def test_eval_prints_the_whole_table(capsys):
    assert main(["eval", "-i", fixture("diag_321.json")]) == EXIT_OK
    rows = read_csv(capsys.readouterr().out)
    assert rows[0] == ["g", "s_g"]
    assert [r[0] for r in rows[1:]] == ["(0)", "(1)", "(2)", "(3)"]
    assert [float(r[1]) for r in rows[1:]] == pytest.approx([3.0, 2.0, 1.0, 0.0], abs=1e-12)


def test_eval_single_class(capsys):
    path = fixture("two_blocks_with_class.json")
    assert main(["eval", "--input", path]) == EXIT_OK
    rows = read_csv(capsys.readouterr().out)
    doc = load_document(path)
    assert rows[1][0] == "(1,0)"
    assert float(rows[1][1]) == pytest.approx(svf(doc.algebra, doc.element, doc.k0_class))
    assert len(rows) == 2


def test_eval_table_format_and_output_file(tmp_path, capsys):
    out = tmp_path / "table.txt"
    assert main(["eval", "-i", fixture("diag_321.json"), "--format", "table", "-o", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    text = out.read_text(encoding="utf-8")
    assert "s_g" in text and "+" in text


def test_eval_bad_input(tmp_path, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text("[1, 2", encoding="utf-8")
    assert main(["eval", "-i", str(broken)]) == EXIT_BAD_INPUT
    assert main(["eval", "-i", str(tmp_path / "missing.json")]) == EXIT_BAD_INPUT
    assert main(["eval", "-i", fixture("lex_class.json")]) == EXIT_BAD_INPUT
    assert "Error" in capsys.readouterr().err


def test_eval_unreadable_input(tmp_path, capsys):
    binary = tmp_path / "binary.json"
    binary.write_bytes(b"\xff\xfe{}")
    assert main(["eval", "-i", str(binary)]) == EXIT_BAD_INPUT
    assert main(["eval", "-i", str(tmp_path)]) == EXIT_BAD_INPUT
    assert main(["realize", "-i", str(tmp_path)]) == EXIT_BAD_INPUT
    assert "cannot read" in capsys.readouterr().err


def test_missing_required_flag():
    with pytest.raises(SystemExit) as info:
        main(["eval"])
    assert info.value.code == 2


def test_battery_small_run(capsys):
    assert main(["battery", "--trials", "20", "--seed", "3", "--sizes", "3,2"]) == EXIT_OK
    rows = read_csv(capsys.readouterr().out)
    assert rows[0] == ["property", "statement", "trials", "failures", "worst_slack"]
    assert len(rows) == 16
    assert all(r[2] == "20" and r[3] == "0" for r in rows[1:])


def test_battery_reads_trials_from_document(capsys):
    assert main(["battery", "-i", fixture("one_minus_t.json"), "--sizes", "2"]) == EXIT_OK
    rows = read_csv(capsys.readouterr().out)
    assert all(r[2] == "50" for r in rows[1:])


def test_battery_rejects_zero_trials(capsys):
    assert main(["battery", "--trials", "0"]) == EXIT_BAD_INPUT
    assert "trials" in capsys.readouterr().err


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("SVF_SEED", "9")
    monkeypatch.setenv("SVF_STEPS", "3")
    monkeypatch.setenv("SVF_WORKERS", "2")
    monkeypatch.setenv("SVF_LOG_LEVEL", "info")
    settings = load_settings()
    assert settings == Settings(seed=9, trials=1000, steps=3, workers=2, log_level="INFO")
    # every setting has a consumer in the CLI
    assert {f.name for f in fields(Settings)} == {"seed", "trials", "steps", "workers", "log_level"}


def test_steps_setting_drives_realize(monkeypatch, capsys):
    monkeypatch.setenv("SVF_STEPS", "2")
    assert main(["realize", "-i", fixture("one_minus_t.json")]) == EXIT_OK
    assert len(read_csv(capsys.readouterr().out)) == 4


def test_bad_environment(monkeypatch):
    monkeypatch.setenv("SVF_TRIALS", "many")
    assert main(["counterexample"]) == EXIT_BAD_INPUT


def test_bad_log_level():
    assert main(["--log-level", "chatty", "counterexample"]) == EXIT_BAD_INPUT


def test_realize_linear_target(capsys):
    assert main(["realize", "-i", fixture("one_minus_t.json")]) == EXIT_OK
    rows = read_csv(capsys.readouterr().out)
    assert rows[0] == ["n", "increment", "distance"]
    assert [int(r[0]) for r in rows[1:]] == list(range(9))
    for n, (_, increment, distance) in enumerate(rows[1:]):
        assert float(distance) < 2.0 ** -n


def test_realize_steps_flag(capsys):
    assert main(["realize", "-i", fixture("two_jump_step.json"), "--steps", "3"]) == EXIT_OK
    assert len(read_csv(capsys.readouterr().out)) == 5


def test_realize_contract_violations():
    assert main(["realize", "-i", fixture("not_normalized.json")]) == EXIT_CONTRACT
    assert main(["realize", "-i", fixture("grid_step.json")]) == EXIT_CONTRACT
    assert main(["realize", "-i", fixture("diag_321.json")]) == EXIT_BAD_INPUT


def test_counterexample_is_reproducible(capsys):
    assert main(["counterexample"]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(["counterexample"]) == EXIT_OK
    second = capsys.readouterr().out
    assert first == second
    rows = read_csv(first)
    assert rows[0] == ["n", "class", "s_value", "expected"]
    assert len(rows) == 103
    assert rows[-2] == ["limit", "(1/1; 1)", "1", "1"]
