import pytest

from accconf.block import ProviderSigningKey
from accconf.group import SystemParams, generate_params
from accconf.rng import DeterministicRNG


def slow_pow(base, exp, mod):
    """Repeated multiplication; independent of the built-in pow."""
    acc = 1
    for _ in range(exp):
        acc = acc * base % mod
    return acc


def brute_inv(a, mod):
    return next(b for b in range(1, mod) if a * b % mod == 1)


@pytest.fixture
def tiny():
    return SystemParams(P=23, Q=11, g=2)


@pytest.fixture
def rng():
    return DeterministicRNG(1234, "tests")


@pytest.fixture(scope="session")
def params64():
    return generate_params(64, 11)


@pytest.fixture(scope="session")
def params256():
    return generate_params(256, 3)


@pytest.fixture(scope="session")
def signer64(params64):
    return ProviderSigningKey.generate(params64, DeterministicRNG(5, "signer"))


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    results = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            ok = outcome == "passed" and results.get(name, True)
            results[name] = ok
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(results, key=lambda n: int(n.split("_")[2])):
        terminalreporter.write_line(f"{'PASS' if results[name] else 'FAIL'}  {name}")
