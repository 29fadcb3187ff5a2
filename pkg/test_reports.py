#!/usr/bin/env python3
"""
Tests for verification reports and table output.
"""

import json

import numpy as np
import pandas as pd
import pytest

from kernel_errors import FieldIOError
from reports import Report, ReportRecord, write_table


def make_report():
    report = Report(metadata={"version": "1.0.0", "wall_time_s": 0.5})
    report.add(ReportRecord(name="gap", group="gap", claim="g < 0", value=-1.0, measured=0.0, tolerance=0.0))
    report.add(ReportRecord(name="fit", group="decay", claim="slope -3", value=-2.5, measured=0.5,
                            tolerance=0.3, detail="too shallow"))
    return report


def test_record_pass_rule():
    """Test that a record passes when the discrepancy is within tolerance"""
    assert ReportRecord("a", "g", "c", 1.0, 1e-3, 1e-3).passed
    assert not ReportRecord("a", "g", "c", 1.0, 2e-3, 1e-3).passed
    assert not ReportRecord("a", "g", "c", np.nan, np.nan, 1.0).passed
    assert not ReportRecord("a", "g", "c", 1.0, np.inf, np.inf).passed


def test_report_summary():
    """Test pass/fail aggregation and duplicate names"""
    report = make_report()
    assert not report.passed
    assert [record.name for record in report.failures] == ["fit"]
    with pytest.raises(ValueError):
        report.add(ReportRecord(name="gap", group="gap", claim="", value=0.0, measured=0.0, tolerance=0.0))
    frame = report.to_frame()
    assert list(frame["pass"]) == [True, False]
    assert "tolerance" in frame.columns


def test_render_text_marks_checks():
    """Test the banner text report"""
    text = make_report().render_text()
    assert text.startswith("=" * 70)
    assert "✅ gap" in text
    assert "❌ fit" in text
    assert "1 of 2 checks failed" in text


def test_write_csv_with_metadata_sidecar(tmp_path):
    """Test CSV output with its metadata sidecar"""
    paths = make_report().write(tmp_path, "csv", stem="verify")
    assert [path.name for path in paths] == ["verify.csv", "verify_metadata.json"]
    frame = pd.read_csv(paths[0])
    assert list(frame["name"]) == ["gap", "fit"]
    sidecar = json.loads(paths[1].read_text())
    assert sidecar["passed"] is False
    assert sidecar["version"] == "1.0.0"


def test_write_json_document(tmp_path):
    """Test JSON output with non-finite and complex values"""
    frame = pd.DataFrame({"re": [1.0, np.inf], "im": [0.0, np.nan]})
    paths = write_table(frame, tmp_path, "rows", "json", metadata={"z": 1 + 2j, "n": np.int64(3)})
    document = json.loads(paths[0].read_text())
    assert document["metadata"] == {"z": {"re": 1.0, "im": 2.0}, "n": 3}
    assert document["records"][1]["re"] == "inf"


def test_write_table_errors(tmp_path):
    """Test unknown formats and unwritable targets"""
    frame = pd.DataFrame({"a": [1]})
    with pytest.raises(ValueError):
        write_table(frame, tmp_path, "rows", "xml")
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(FieldIOError):
        write_table(frame, blocker / "sub", "rows", "csv")
