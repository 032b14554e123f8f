import numpy as np
import pytest

from lensfol.fn1d import sample_diffeo
from lensfol.homog_bundle import HomogFn, QuadHomogField

# populated by test_acceptance through record_property
_CRITERIA = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.failed and report.when == "setup"):
        _CRITERIA[props["criterion"]] = (report.passed, props.get("title", ""), props.get("detail", ""),
                                         report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, title, detail, dur = _CRITERIA[n]
        terminalreporter.write_line(
            f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]  ({dur:.2f}s)")


@pytest.fixture(scope="session")
def aniso():
    """A definite 2-homogeneous f whose level sets turn with the base angle."""
    return HomogFn.from_quadratic(QuadHomogField.rotated_diag(0.5, 2.0))


@pytest.fixture(scope="session")
def round_f():
    return HomogFn.norm_power(2)


@pytest.fixture(scope="session")
def diffeos():
    rng = np.random.default_rng(20240601)
    return [sample_diffeo(rng) for _ in range(20)]
