import os
import sys

import pytest

from horn_abduce.grounder import ground_potential_graph
from horn_abduce.ingest import parse_instance, parse_solution

TESTS = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(TESTS)
DATA = os.path.join(ROOT, "data")
sys.path.insert(0, TESTS)  # for the corpus helper


def data_path(*parts):
    return os.path.join(DATA, *parts)


def load(*parts):
    with open(data_path(*parts), encoding="utf-8") as fh:
        return parse_instance(fh.read())


def pytest_addoption(parser):
    parser.addoption("--asp", action="store_true", default=False,
                     help="run the clingo cross-checks (needs the clingo package)")


def pytest_configure(config):
    config.addinivalue_line("markers", "asp: cross-check against an external ASP solver")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--asp"):
        return
    skip = pytest.mark.skip(reason="external ASP checks run with --asp")
    for item in items:
        if "asp" in item.keywords:
            item.add_marker(skip)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for the acceptance summary, then assert."""
    def record(number, ok, text):
        ACCEPTANCE_LINES.append("criterion %d: %s  %s" % (number, "PASS" if ok else "FAIL", text))
        print(ACCEPTANCE_LINES[-1])
        assert ok, text
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def pytest_report_header(config):
    from corpus import SEED
    from horn_abduce import kernels
    return "horn_abduce: kernel backend %s, HORN_ABDUCE_SEED=%d" % (kernels.BACKEND, SEED)


@pytest.fixture(scope="session")
def ex1():
    return load("example1.kb")


@pytest.fixture(scope="session")
def ex1_graph(ex1):
    return ground_potential_graph(ex1)


@pytest.fixture(scope="session")
def fig1():
    with open(os.path.join(TESTS, "data", "fig1_solution.json"), encoding="utf-8") as fh:
        return parse_solution(fh.read())
