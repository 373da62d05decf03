"""Shared fixtures.  The 52-point design and its full enumeration are built
once per session because resolution enumeration takes tens of seconds."""

import time

import pytest

from arcembed.compat import build_compat_graph, max_clique
from arcembed.design import DifferenceFamily, develop_family
from arcembed.enumeration import all_parallel_classes, all_resolutions

# seconds spent building the expensive session fixtures
TIMINGS: dict[str, float] = {}

ROT52_BLOCKS = [[18, 33, 22, 46], [21, 30, 37, 31], [6, 45, 25, 43], [24, 27, 19, 49]]


@pytest.fixture(scope="session")
def rot52_family():
    return DifferenceFamily(51, ROT52_BLOCKS)


@pytest.fixture(scope="session")
def rot52_design(rot52_family):
    return develop_family(rot52_family)


@pytest.fixture(scope="session")
def rot52_classes(rot52_design):
    t = time.perf_counter()
    classes = all_parallel_classes(rot52_design)
    TIMINGS["classes"] = time.perf_counter() - t
    return classes


@pytest.fixture(scope="session")
def rot52_resolutions(rot52_design, rot52_classes):
    t = time.perf_counter()
    res = all_resolutions(rot52_design, rot52_classes)
    TIMINGS["resolutions"] = time.perf_counter() - t
    return res


@pytest.fixture(scope="session")
def rot52_graph(rot52_resolutions, rot52_classes):
    return build_compat_graph(rot52_resolutions, rot52_classes)


@pytest.fixture(scope="session")
def rot52_cliques(rot52_graph):
    return max_clique(rot52_graph)


# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
