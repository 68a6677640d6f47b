import json

import pytest

from homogopt.cli import main

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    def log(number, title, ok, detail):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'} {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return log


@pytest.fixture(scope="session")
def full_verify(tmp_path_factory):
    """One default verify run over the whole corpus, shared by several tests."""
    out = tmp_path_factory.mktemp("verify")
    code = main(["verify", "--out", str(out), "--seed", "0"])
    report = json.loads((out / "theorem_report.json").read_text(encoding="utf-8"))
    return code, out, report
