from __future__ import annotations

from pathlib import Path

import pytest

from sizeterm.parser import parse_program

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# criterion number -> list of (label, passed, detail)
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.hrs"


def load(name: str):
    return parse_program(fixture_path(name).read_text(encoding="utf-8"))


@pytest.fixture
def program():
    return load


def record(criterion: int, label: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE.setdefault(criterion, []).append((label, passed, detail))
    status = "PASS" if passed else "FAIL"
    print(f"criterion {criterion}{label}: {status} {detail}".rstrip())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{label or 'all'} {'pass' if p else 'FAIL'}{': ' + d if d else ''}" for label, p, d in parts)
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
