import json
import math
from xml.dom import minidom

import pytest

from gammavar import (
    CheckRecord,
    SuiteReport,
    render_csv,
    render_json,
    render_line_chart,
)
from gammavar.reports import report_rows


def _report():
    checks = [
        CheckRecord(
            name="alpha",
            values={"norm": 2.5, "n": 4},
            std_errors={"norm": 0.01},
            verdict="pass",
        ),
        CheckRecord(name="beta", verdict="fail", detail="gap too large"),
        CheckRecord(name="survey", values={"ratio": 1.0}, verdict="info"),
    ]
    return SuiteReport(suite="demo", config={"seed": 0}, checks=checks, version="test")


class TestCheckRecord:
    def test_verdict_validation(self):
        with pytest.raises(ValueError):
            CheckRecord(name="x", verdict="maybe")

    def test_passed_treats_info_as_non_failing(self):
        assert CheckRecord(name="x", verdict="pass").passed
        assert CheckRecord(name="x", verdict="info").passed
        assert not CheckRecord(name="x", verdict="fail").passed


class TestSuiteReport:
    def test_overall_pass_ignores_info_records(self):
        report = _report()
        assert not report.overall_pass
        passing = SuiteReport(
            suite="demo",
            config={},
            checks=[CheckRecord(name="a"), CheckRecord(name="b", verdict="info")],
            version="test",
        )
        assert passing.overall_pass

    def test_document_round_trips_through_json(self):
        doc = _report().to_document()
        assert doc["suite"] == "demo"
        assert doc["overall_pass"] is False
        assert [c["name"] for c in doc["checks"]] == ["alpha", "beta", "survey"]
        parsed = json.loads(render_json(doc))
        assert parsed == doc


class TestJsonRendering:
    def test_keys_are_sorted_and_output_ends_with_newline(self):
        text = render_json({"b": 1, "a": 2})
        assert text == '{\n  "a": 2,\n  "b": 1\n}\n'

    def test_determinism_across_insertion_orders(self):
        forward = {"x": 1, "y": {"c": 3, "d": 4}}
        backward = {"y": {"d": 4, "c": 3}, "x": 1}
        assert render_json(forward) == render_json(backward)

    def test_non_finite_values_are_rejected(self):
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(ValueError):
                render_json({"value": bad})


class TestCsvRendering:
    def test_rows_cover_every_value_and_error(self):
        rows = report_rows(_report())
        assert rows[0] == ["suite", "check", "verdict", "quantity", "value", "std_error"]
        body = rows[1:]
        alpha_rows = [r for r in body if r[1] == "alpha"]
        assert {r[3] for r in alpha_rows} == {"norm", "n"}
        norm_row = next(r for r in alpha_rows if r[3] == "norm")
        assert norm_row == ["demo", "alpha", "pass", "norm", "2.5", "0.01"]

    def test_numeric_cells_match_the_json_renderer(self):
        value = 0.1 + 0.2
        report = SuiteReport(
            suite="s",
            config={},
            checks=[CheckRecord(name="c", values={"q": value})],
            version="test",
        )
        row = report_rows(report)[1]
        assert row[4] == json.dumps(value)

    def test_crlf_line_endings(self):
        text = render_csv(_report())
        assert "\r\n" in text
        assert text.replace("\r\n", "").count("\n") == 0


class TestLineChart:
    def _series(self):
        return {
            "total": ([4.0, 16.0, 64.0], [2.0, 4.0, 8.0]),
            "randomized": ([4.0, 16.0, 64.0], [1.0, 1.0, 1.0]),
        }

    def test_renders_parseable_svg_with_one_polyline_per_series(self):
        svg = render_line_chart(
            self._series(), title="norms", x_label="n", y_label="value", log_x=True
        )
        doc = minidom.parseString(svg)
        root = doc.documentElement
        assert root.tagName == "svg"
        polylines = root.getElementsByTagName("polyline")
        assert len(polylines) == 2
        texts = [
            node.firstChild.data for node in root.getElementsByTagName("text")
        ]
        assert "norms" in texts
        assert any("total" in t for t in texts)

    def test_log_scale_spaces_powers_evenly(self):
        svg = render_line_chart(
            {"tv": ([4.0, 16.0, 64.0], [1.0, 1.0, 1.0])}, "t", "n", "y", log_x=True
        )
        doc = minidom.parseString(svg)
        points = doc.getElementsByTagName("polyline")[0].getAttribute("points")
        xs = [float(pair.split(",")[0]) for pair in points.split()]
        assert abs((xs[1] - xs[0]) - (xs[2] - xs[1])) <= 1e-6

    def test_empty_or_inconsistent_series_are_rejected(self):
        with pytest.raises(ValueError):
            render_line_chart({}, "t", "x", "y")
        with pytest.raises(ValueError):
            render_line_chart({"s": ([1.0, 2.0], [1.0])}, "t", "x", "y")
