"""CSV/JSON result tables"""

import json

import pytest

from lib.report_writer import (
    CURVE_COLUMNS,
    format_value,
    render,
    write_json_lines,
    write_report,
)

ROWS = [
    {
        "scheme": "pair_compartment",
        "key_qubits": 2,
        "statistic": "mean",
        "method": "analytic",
        "probability": 0.4375,
        "trials": 0,
        "stderr": None,
        "seed": 0,
    },
    {
        "scheme": "pair_flat",
        "key_qubits": 2,
        "statistic": "mean",
        "method": "analytic",
        "probability": 0.45784273324171,
        "trials": 0,
        "stderr": None,
        "seed": 0,
    },
]


def test_format_value():
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(False) == "false"
    assert format_value(0.1 + 0.2) == "0.3"
    assert format_value(1.0) == "1"
    assert format_value(3) == "3"


def test_csv_layout():
    text = render(ROWS, CURVE_COLUMNS)
    lines = text.splitlines()
    assert lines[0] == ",".join(CURVE_COLUMNS)
    assert lines[1] == "pair_compartment,2,mean,analytic,0.4375,0,,0"
    assert lines[2].startswith("pair_flat,2,mean,analytic,0.457842733242,")
    assert text.endswith("\n")


def test_json_mirror_keeps_column_order():
    data = json.loads(render(ROWS, CURVE_COLUMNS, "json"))
    assert list(data[0]) == list(CURVE_COLUMNS)
    assert data[1]["probability"] == ROWS[1]["probability"]


def test_unknown_format():
    with pytest.raises(ValueError):
        render(ROWS, CURVE_COLUMNS, "xml")


def test_reruns_are_byte_identical(tmp_path):
    first = tmp_path / "out" / "curves.csv"
    second = tmp_path / "again.csv"
    text = write_report(ROWS, CURVE_COLUMNS, "csv", first)
    write_report(ROWS, CURVE_COLUMNS, "csv", second)
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text() == text


def test_write_report_without_file():
    assert write_report(ROWS, CURVE_COLUMNS) == render(ROWS, CURVE_COLUMNS)


def test_json_lines(tmp_path):
    path = tmp_path / "transcripts.jsonl"
    count = write_json_lines([{"b": 1, "a": 2}, {"c": [0, 1]}], path)
    assert count == 2
    lines = path.read_text().splitlines()
    assert lines[0] == '{"a": 2, "b": 1}'
    assert json.loads(lines[1]) == {"c": [0, 1]}
