import pytest

from ltalloc import aggregation as agg
from ltalloc.var_kernel import BRANDT_PARAMS

_acceptance = {}


def pytest_addoption(parser):
    parser.addoption(
        "--run-long",
        action="store_true",
        default=False,
        help="run opt-in long tests (full-scale 10^5-path grid search)",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-long"):
        return
    skip = pytest.mark.skip(reason="long test; use --run-long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


def pytest_runtest_logreport(report):
    marker = dict(report.user_properties).get("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = report.outcome
        if hasattr(report, "wasxfail"):
            # known failure: the assertion still runs and still counts as a FAIL
            outcome = "xpassed" if report.passed else "xfailed"
        _acceptance[marker] = outcome


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    m = item.get_closest_marker("acceptance")
    if m is not None:
        item.user_properties.append(("acceptance", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance, key=lambda s: (int(s.split(".")[0]), s)):
        outcome = _acceptance[name]
        verdict = {
            "passed": "PASS",
            "failed": "FAIL",
            "xfailed": "FAIL (known, see test reason)",
            "xpassed": "PASS (was expected to fail)",
        }.get(outcome, outcome.upper())
        terminalreporter.write_line(f"criterion {name}: {verdict}")


@pytest.fixture(scope="session")
def params():
    return BRANDT_PARAMS


@pytest.fixture(scope="session")
def cont():
    return agg.recover_continuous(BRANDT_PARAMS)


@pytest.fixture(scope="session")
def xdist():
    return agg.x_distribution(BRANDT_PARAMS)
