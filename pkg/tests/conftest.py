import numpy as np
import pytest

from finslerlab.geometry import Ball, ComplexEllipsoid, Polydisk


@pytest.fixture
def ball2():
    return Ball(1.0, 2)


@pytest.fixture
def polydisk2():
    return Polydisk([1.0, 1.0])


@pytest.fixture
def ellipsoid12():
    return ComplexEllipsoid([1.0, 2.0])


def cvec(rng, n, count=None):
    shape = (n,) if count is None else (count, n)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# -- acceptance bookkeeping ----------------------------------------------

import contextlib
import time

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Context manager recording one part of an acceptance criterion.

    The criterion's line reads PASS only if every recorded part passed
    within its runtime limit.
    """

    @contextlib.contextmanager
    def record(number, title, limit_s):
        entry = _ACCEPTANCE.setdefault(number, {"title": title, "ok": True, "time": 0.0, "notes": []})
        start = time.perf_counter()
        try:
            yield entry["notes"]
        except BaseException:
            entry["ok"] = False
            raise
        finally:
            elapsed = time.perf_counter() - start
            entry["time"] += elapsed
            if entry["time"] > limit_s:
                entry["ok"] = False
                entry["notes"].append(f"runtime {entry['time']:.1f} s over {limit_s} s")
        assert entry["time"] <= limit_s, f"runtime {entry['time']:.1f} s exceeds {limit_s} s"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[number]
        notes = "; ".join(e["notes"])
        terminalreporter.write_line(
            f"criterion {number:2d} {'PASS' if e['ok'] else 'FAIL'}  {e['title']}  "
            f"({e['time']:.1f} s){'  ' + notes if notes else ''}")
