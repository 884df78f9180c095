from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


ACCEPTANCE: dict = {}


def record(key: str, ok: bool, detail: str) -> None:
    """Store an acceptance outcome; printed in the terminal summary."""
    ACCEPTANCE[key] = ("PASS" if ok else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key, (status, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"[{status}] {key}: {detail}")
