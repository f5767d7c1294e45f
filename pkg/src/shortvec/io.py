"""CSV and JSON serialization of raw trial rows and reports."""

from __future__ import annotations

import json
import math
from typing import IO, Sequence


def format_value(v) -> str:
    if isinstance(v, (bool,)) or type(v).__name__ == "bool_":
        return "1" if v else "0"
    if isinstance(v, float) or type(v).__name__.startswith("float"):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


class CsvRowWriter:
    """Writes the header immediately and each row as one complete, flushed line."""

    def __init__(self, fh: IO[str], header: Sequence[str]):
        self.fh = fh
        self.rows = 0
        self._write(header)

    def _write(self, values):
        self.fh.write(",".join(format_value(v) for v in values) + "\n")
        self.fh.flush()

    def __call__(self, row):
        self._write(row)
        self.rows += 1


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def report_document(config: dict, reports, runtime_seconds: float) -> str:
    doc = {
        "config": config,
        "reports": [r.to_dict() for r in reports],
        "runtimeSeconds": runtime_seconds,
    }
    return json.dumps(_clean(doc), indent=2) + "\n"


def summary_lines(reports) -> list[str]:
    out = []
    for r in reports:
        verdict = "PASS" if r.verdict else "FAIL"
        out.append(f"{verdict}  {r.name}: statistic={r.statistic:.6g} threshold={r.threshold:.6g} "
                   f"m={r.sample_size}" + (f"  [{r.notes}]" if r.notes else ""))
    return out
