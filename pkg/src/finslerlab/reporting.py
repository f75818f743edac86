"""Deterministic text output: structured records (JSON lines) and
delimited tables. Floats are printed with 17 significant digits so that a
rerun with the same seed is byte-identical."""

import json

import numpy as np


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (complex, np.complexfloating)):
        return f"{format(x.real, '.17g')}{'+' if x.imag >= 0 else '-'}{format(abs(x.imag), '.17g')}j"
    return str(x)


def plain(obj):
    """Recursively convert numpy scalars/arrays and complex numbers to JSON-able data."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return [plain(obj.real), plain(obj.imag)]
    return obj


def record_line(rec):
    return json.dumps(plain(rec), sort_keys=True, separators=(",", ":"))


def delimited(rows, columns, sep="\t"):
    lines = [sep.join(columns)]
    for row in rows:
        lines.append(sep.join(fmt(row[c]) for c in columns))
    return "\n".join(lines) + "\n"
