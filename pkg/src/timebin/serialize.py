"""CSV/JSON output with stable number formatting.

Floats carry 9 significant digits and switch to scientific notation below
1e-3 in magnitude, so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import io
import json
import math
from typing import Any, Iterable, Sequence


def format_number(x: Any) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0"
    if abs(x) < 1e-3:
        return f"{x:.8e}"
    return f"{x:.9g}"


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(format_number(v) for v in row) + "\n")
    return buf.getvalue()


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        # round-trip through the fixed format to keep output stable
        return float(format_number(value))
    return value


def to_json(obj: dict) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"
