from __future__ import annotations

import time

import numpy as np
import pytest

from jacobitrace.eigensolve import all_eigenvalues
from jacobitrace.jacobi import assemble

# criterion id -> (passed, seconds, budget, detail)
_ACCEPTANCE: dict[str, tuple[bool, float, float, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(id, budget): acceptance criterion with a runtime budget in seconds")


@pytest.fixture(scope="session", autouse=True)
def _warm_jit():
    # compile (or load cached) numba kernels once so timings measure the numerics
    all_eigenvalues(assemble(np.zeros(600), np.ones(599)))
    all_eigenvalues(assemble(np.zeros(3), np.ones(2)))


class Criterion:
    """Timer and detail collector for one acceptance criterion."""

    def __init__(self, cid: str, budget: float):
        self.id = cid
        self.budget = budget
        self.detail = ""
        self.start = time.perf_counter()

    def note(self, text: str) -> None:
        self.detail = text

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def check_runtime(self) -> None:
        assert self.elapsed < self.budget, f"{self.id}: runtime {self.elapsed:.2f} s exceeds {self.budget} s"


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("acceptance")
    cid, budget = marker.args
    crit = Criterion(cid, budget)
    request.node._criterion = crit
    yield crit


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    crit = getattr(item, "_criterion", None)
    if crit is None or report.when != "call":
        return
    _ACCEPTANCE[crit.id] = (report.passed, crit.elapsed, crit.budget, crit.detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE, key=lambda c: int(c[1:])):
        passed, seconds, budget, detail = _ACCEPTANCE[cid]
        status = "PASS" if passed else "FAIL"
        tr.write_line(f"{cid:>4} {status}  {seconds:7.2f} s / {budget:g} s  {detail}")
