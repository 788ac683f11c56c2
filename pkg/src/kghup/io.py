"""CSV/JSON emitters shared by the library modules and the CLI."""

from __future__ import annotations

import csv
import io
import json
import math
from contextlib import contextmanager
from typing import Iterable, Sequence


def fmt(x) -> str:
    """Format a number with 17 significant digits (round-trip exact)."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


@contextmanager
def _sink(dest):
    if dest is None or dest == "-":
        buf = io.StringIO()
        yield buf
        import sys
        sys.stdout.write(buf.getvalue())
    elif hasattr(dest, "write"):
        yield dest
    else:
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            yield fh


def write_csv(dest, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Comma-separated, header row, LF line endings, UTF-8."""
    with _sink(dest) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_density_csv(dest, t, density) -> None:
    rows = ((float(a), complex(d).real, complex(d).imag) for a, d in zip(t, density))
    write_csv(dest, ["t", "re", "im"], rows)


def write_spectrum_csv(dest, records) -> None:
    """``records``: iterable of (beta, N, eigenvalues)."""
    rows = []
    for beta, n, eigs in records:
        for k, lam in enumerate(eigs):
            lam = complex(lam)
            rows.append((float(beta), int(n), k, lam.real, lam.imag, abs(lam)))
    write_csv(dest, ["beta", "N", "index", "re", "im", "modulus"], rows)


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return fmt(obj)
        return float(format(obj, ".17g"))
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return _jsonable(obj.item())
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):  # str enums
        return obj.value
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2)
