import itertools
import time

import pytest

from permtwin import _backend

BACKENDS = [pytest.param(_backend.pure, id="pure")]
if _backend.compiled is not None:
    BACKENDS.append(pytest.param(_backend.compiled, id="compiled"))

# host permutation with one length-3 pair marked by position
SAMPLE = (6, 1, 4, 7, 3, 9, 8, 2, 5)
# 18 entries, no tight twins of length 3 or more
NO_TIGHT_18 = (14, 15, 16, 3, 2, 1, 10, 11, 12, 5, 4, 18, 8, 9, 17, 7, 6, 13)


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return request.param


def all_perms(n):
    return itertools.permutations(range(1, n + 1))


# acceptance verdicts, printed in the terminal summary
CRITERIA: dict[int, tuple[bool, str]] = {}


class Criterion:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.start = time.perf_counter()

    def report(self, ok: bool, detail: str) -> bool:
        secs = time.perf_counter() - self.start
        line = f"criterion {self.number:2d} [{'PASS' if ok else 'FAIL'}] {self.title}: {detail} ({secs:.1f}s)"
        CRITERIA[self.number] = (ok, line)
        print(line)
        return ok


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n][1])
