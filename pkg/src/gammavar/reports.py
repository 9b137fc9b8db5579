"""Suite reports and their deterministic JSON / CSV / SVG renderings.

Reports carry only quantities that are functions of the experiment config and
seed, so a rerun with the same config produces byte-identical output; wall
clock and thread count belong to the stderr log, never to a report.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

VERDICTS = ("pass", "fail", "info")


@dataclass(frozen=True)
class CheckRecord:
    """One named check: the values it compared, their std errors, a verdict.

    verdict "info" marks quantities that are reported without being asserted;
    only "fail" counts against a suite."""

    name: str
    values: dict[str, float] = field(default_factory=dict)
    std_errors: dict[str, float] = field(default_factory=dict)
    verdict: str = "pass"
    detail: str = ""

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "values": {k: _jsonable(v) for k, v in self.values.items()},
            "std_errors": {k: _jsonable(v) for k, v in self.std_errors.items()},
            "detail": self.detail,
        }


@dataclass
class SuiteReport:
    suite: str
    config: dict
    checks: list[CheckRecord]
    version: str

    @property
    def overall_pass(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_document(self) -> dict:
        return {
            "suite": self.suite,
            "version": self.version,
            "config": self.config,
            "overall_pass": self.overall_pass,
            "checks": [check.to_document() for check in self.checks],
        }


def _jsonable(value):
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value} cannot enter a report")
        return value
    return value


def render_json(document: dict) -> str:
    """Canonical JSON: UTF-8, keys sorted, two-space indent, trailing newline."""
    return json.dumps(
        document, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False
    ) + "\n"


def report_rows(report: SuiteReport) -> list[list[str]]:
    """Flatten a report to rows sharing the JSON rendering of every numeric."""
    rows = [["suite", "check", "verdict", "quantity", "value", "std_error"]]
    for check in report.checks:
        for key in sorted(check.values):
            value = check.values[key]
            err = check.std_errors.get(key, "")
            rows.append(
                [
                    report.suite,
                    check.name,
                    check.verdict,
                    key,
                    json.dumps(_jsonable(value)),
                    json.dumps(_jsonable(err)) if err != "" else "",
                ]
            )
    return rows


def render_csv(report: SuiteReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerows(report_rows(report))
    return buffer.getvalue()


# --- static SVG line chart -------------------------------------------------------

_SVG_WIDTH = 640
_SVG_HEIGHT = 400
_MARGIN_LEFT = 64
_MARGIN_RIGHT = 24
_MARGIN_TOP = 40
_MARGIN_BOTTOM = 48
_SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt(x: float) -> str:
    return format(x, ".6g")


def render_line_chart(
    series: dict[str, tuple[list[float], list[float]]],
    title: str,
    x_label: str,
    y_label: str,
    log_x: bool = False,
) -> str:
    """Self-contained SVG 1.1 line chart; x ticks sit at the data points."""
    if not series:
        raise ValueError("a chart needs at least one series")
    xs_all: list[float] = []
    ys_all: list[float] = []
    for xs, ys in series.values():
        if len(xs) != len(ys) or not xs:
            raise ValueError("each series needs matching nonempty x and y lists")
        xs_all.extend(xs)
        ys_all.extend(ys)

    def x_coord(x: float) -> float:
        return math.log10(x) if log_x else x

    x_lo = min(x_coord(x) for x in xs_all)
    x_hi = max(x_coord(x) for x in xs_all)
    y_lo = min(0.0, min(ys_all))
    y_hi = max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    y_hi += 0.05 * (y_hi - y_lo)

    plot_w = _SVG_WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = _SVG_HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def px(x: float) -> float:
        return _MARGIN_LEFT + plot_w * (x_coord(x) - x_lo) / (x_hi - x_lo)

    def py(y: float) -> float:
        return _MARGIN_TOP + plot_h * (1.0 - (y - y_lo) / (y_hi - y_lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_SVG_WIDTH}" height="{_SVG_HEIGHT}" '
        f'viewBox="0 0 {_SVG_WIDTH} {_SVG_HEIGHT}">',
        f'<rect width="{_SVG_WIDTH}" height="{_SVG_HEIGHT}" fill="white"/>',
        f'<text x="{_SVG_WIDTH / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]
    axis_bottom = _MARGIN_TOP + plot_h
    axis_right = _MARGIN_LEFT + plot_w
    parts.append(
        f'<line x1="{_MARGIN_LEFT}" y1="{axis_bottom}" x2="{axis_right}" '
        f'y2="{axis_bottom}" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP}" x2="{_MARGIN_LEFT}" '
        f'y2="{axis_bottom}" stroke="black" stroke-width="1"/>'
    )
    # x ticks at the distinct data abscissae
    for x in sorted(set(xs_all)):
        cx = px(x)
        parts.append(
            f'<line x1="{cx:.1f}" y1="{axis_bottom}" x2="{cx:.1f}" '
            f'y2="{axis_bottom + 5}" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{cx:.1f}" y="{axis_bottom + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(x)}</text>'
        )
    # five y ticks
    for i in range(5):
        y = y_lo + (y_hi - y_lo) * i / 4
        cy = py(y)
        parts.append(
            f'<line x1="{_MARGIN_LEFT - 5}" y1="{cy:.1f}" x2="{_MARGIN_LEFT}" '
            f'y2="{cy:.1f}" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_LEFT - 9}" y="{cy + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(y)}</text>'
        )
    parts.append(
        f'<text x="{_MARGIN_LEFT + plot_w / 2:.1f}" y="{_SVG_HEIGHT - 10}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="13">{x_label}</text>'
    )
    parts.append(
        f'<text x="16" y="{_MARGIN_TOP + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {_MARGIN_TOP + plot_h / 2:.1f})">{y_label}</text>'
    )
    for index, (name, (xs, ys)) in enumerate(series.items()):
        color = _SERIES_COLORS[index % len(_SERIES_COLORS)]
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        for x, y in zip(xs, ys):
            parts.append(
                f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>'
            )
        legend_y = _MARGIN_TOP + 8 + 18 * index
        parts.append(
            f'<rect x="{axis_right - 170}" y="{legend_y - 9}" width="12" height="12" '
            f'fill="{color}"/>'
        )
        parts.append(
            f'<text x="{axis_right - 152}" y="{legend_y + 2}" '
            f'font-family="sans-serif" font-size="12">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
