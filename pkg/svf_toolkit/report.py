"""
Render result rows as CSV or as a tabulate table.
"""

import csv
import io
from typing import Any, List, Sequence

from tabulate import tabulate

from .k0_order import format_class
from .realize import CounterexampleReport, RealizationTrace
from .svf_engine import PROPERTIES, BatteryReport, SVFTable

FORMATS = ("csv", "table")


def render(headers: Sequence[str], rows: Sequence[Sequence[Any]], fmt: str = "csv") -> str:
    if fmt == "table":
        return tabulate(rows, headers=list(headers), tablefmt="pretty") + "\n"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buffer.getvalue()


def svf_table_rows(table: SVFTable) -> List[List[Any]]:
    return [[format_class(g), repr(float(value))] for g, value in table.rows()]


def battery_rows(report: BatteryReport) -> List[List[Any]]:
    return [
        [key, PROPERTIES[key], trials, failures, repr(float(slack))]
        for key, trials, failures, slack in report.rows()
    ]


def trace_rows(trace: RealizationTrace) -> List[List[Any]]:
    return [[row.n, repr(float(row.increment)), repr(float(row.distance))] for row in trace.rows()]


def counterexample_rows(report: CounterexampleReport) -> List[List[Any]]:
    return [[row.label, row.k0_class, row.value, row.expected] for row in report.rows]


SVF_HEADERS = ("g", "s_g")
BATTERY_HEADERS = ("property", "statement", "trials", "failures", "worst_slack")
TRACE_HEADERS = ("n", "increment", "distance")
COUNTEREXAMPLE_HEADERS = ("n", "class", "s_value", "expected")
