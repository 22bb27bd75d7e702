from pathlib import Path

import pytest

from deltalog import parse_program

CORPUS = Path(__file__).parent / "corpus"


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text()


@pytest.fixture
def tc():
    return parse_program(corpus_text("tc.dl"))


@pytest.fixture
def treep():
    return parse_program(corpus_text("treeP.dl"))


ACCEPTANCE = []  # (criterion, ok, detail), filled by test_acceptance.py


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {n}: {detail}")
