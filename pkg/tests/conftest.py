import numpy as np
import pytest

from lcsam.harness import build_body, build_function


def fn(**spec):
    return build_function(spec)


def body(**spec):
    return build_body(spec)


@pytest.fixture
def gauss1():
    return fn(form="gaussian", dim=1)


@pytest.fixture
def halfexp():
    return fn(form="linear", slope=[1.0], restrict={"type": "box", "lo": [0.0], "hi": [None]})


@pytest.fixture
def unit_interval():
    return body(type="interval", lo=-1, hi=1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str = ""):
    CRITERIA[number] = (bool(passed), detail)
    print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
