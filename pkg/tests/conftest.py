import numpy as np
import pytest

# key -> (ok, detail), filled by test_acceptance.py; keys are "N" or "N.sub" for criterion N
ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    grouped = {}
    for key, (ok, detail) in ACCEPTANCE.items():
        num, _, sub = str(key).partition(".")
        grouped.setdefault(int(num), []).append((sub, ok, detail))
    terminalreporter.section("acceptance criteria")
    for num in sorted(grouped):
        parts = sorted(grouped[num])
        ok = all(p[1] for p in parts)
        if len(parts) == 1 and not parts[0][0]:
            detail = parts[0][2]
        else:
            detail = "; ".join(f"{s}={'ok' if o else 'FAIL'} ({d})" for s, o, d in parts)
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
