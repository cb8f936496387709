from __future__ import annotations

import re
from pathlib import Path

import pytest

CORPUS = Path(__file__).parent / "corpus"

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")
_results: dict[int, tuple[str, bool]] = {}


def corpus_files() -> list[Path]:
    return sorted(p for p in CORPUS.rglob("*") if p.suffix in (".def", ".mod"))


@pytest.fixture
def corpus() -> Path:
    return CORPUS


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if match is None:
        return
    number, name = int(match.group(1)), match.group(2)
    failed = report.failed or (report.when == "call" and report.skipped)
    prev = _results.get(number, (name, True))
    _results[number] = (prev[0], prev[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        name, ok = _results[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({name.replace('_', ' ')})")
