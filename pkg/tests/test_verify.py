import csv

import pytest

from homogopt.errors import ConfigError
from homogopt.funcmodel import get_entry, negative_control
from homogopt.verify import CHECKS, CheckRecord, VerifyConfig, verify_theorems


def test_empty_entry_list_gives_empty_report():
    rep = verify_theorems([])
    assert rep.records == [] and rep.passed


def test_unknown_entry_in_config():
    with pytest.raises(ConfigError):
        verify_theorems([get_entry("cubic")], VerifyConfig(h_grids={"nope": (0.1, 0.5, 4)}))


def test_record_rejects_unregistered_check():
    with pytest.raises(ValueError):
        CheckRecord("made-up", "cubic", {}, {}, "pass", True)


def test_full_report_shape(full_verify):
    code, out, report = full_verify
    records = report["records"]
    assert code == 0
    assert len(records) >= 30
    assert report["summary"]["mandatory_failures"] == 0
    assert all(r["check"] in CHECKS for r in records)
    keys = [(r["entry"], r["check"], r["inputs"].get("h", float("-inf"))) for r in records]
    assert keys == sorted(keys)
    with open(out / "theorem_report.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:3] == ["entry", "check", "status"]
    assert len(rows) == len(records) + 1


def test_informational_records_never_pass_or_fail(full_verify):
    _, _, report = full_verify
    info = [r for r in report["records"] if not r["mandatory"]]
    assert info and all(r["status"] == "info" for r in info)
    checks = {r["check"] for r in info}
    assert {"equal-minima-count", "equal-extrema-count", "census-rebound-2d"} <= checks


def test_census_rebounds_past_ripple_cancelling_scale(full_verify):
    _, _, report = full_verify
    (rec,) = [r for r in report["records"] if r["check"] == "census-rebound-2d"]
    assert max(rec["observed"]["census"]) > rec["observed"]["census_at_sweep_end"]


def test_negative_control_fails_mandatory_checks():
    rep = verify_theorems([negative_control()], VerifyConfig(identity_samples=2))
    failing = {r.check for r in rep.mandatory_failures}
    assert "containment" in failing
    assert not rep.passed


def test_subset_with_custom_grid():
    rep = verify_theorems([get_entry("cubic")], VerifyConfig(h_grids={"cubic": (0.1, 0.9, 5)}))
    (decay,) = [r for r in rep.records if r.check == "count-decay"]
    assert len(decay.inputs["h_values"]) == 5
    assert rep.passed
