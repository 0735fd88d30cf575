import pytest

from fracoam.propagation import PropagationConfig, propagate

# resolving the three near-axis vortices at kz = 1 takes a fine grid and a deep spectrum
KZ1_CONFIG = PropagationConfig(M=3.5, kz=1.0, grid_n=801, extent=1.0, spectrum_threshold=2e-6)
KZ50_CONFIG = PropagationConfig(M=3.5, kz=50.0, grid_n=401, extent=1.0)


@pytest.fixture(scope="session")
def field_kz1():
    return propagate(KZ1_CONFIG)


@pytest.fixture(scope="session")
def field_kz50():
    return propagate(KZ50_CONFIG)


# ---------------------------------------------------------- acceptance report

_ACCEPTANCE = {}


def _criterion(nodeid):
    name = nodeid.split("::")[-1]
    if "test_acceptance.py" not in nodeid or not name.startswith("test_a"):
        return None
    return "A" + name[len("test_a"):].split("_")[0]


def pytest_runtest_logreport(report):
    crit = _criterion(report.nodeid)
    if crit is None:
        return
    measured = dict(report.user_properties).get("measured", "")
    if report.when == "call" or report.failed or report.skipped:
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        prev = _ACCEPTANCE.get(crit)
        if prev is None or prev[0] == "PASS":
            _ACCEPTANCE[crit] = (status, measured or (prev[1] if prev else ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for crit in sorted(_ACCEPTANCE, key=lambda c: int(c[1:])):
        status, measured = _ACCEPTANCE[crit]
        terminalreporter.write_line(f"{crit:<4} {status}  {measured}".rstrip())
