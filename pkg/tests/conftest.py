import numpy as np
import pytest

from kickedion import TrapParams, floquet_decompose, one_period_operator

FIG1 = dict(k=0.4, nu_tau=1.8, eta=0.25)
FIG2 = dict(k=2.7, nu_tau=1.7, eta=0.5)
FIG3 = dict(k=1.2, nu_tau=2 * np.pi / 3, eta=0.5)


def random_state(rng, N, support=None):
    n = support or N
    psi = np.zeros(N, dtype=complex)
    psi[:n] = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)


@pytest.fixture(scope="session")
def fig1():
    p = TrapParams(N=128, **FIG1)
    U = one_period_operator(p)
    return p, U, floquet_decompose(U, source=p)


@pytest.fixture(scope="session")
def fig2():
    p = TrapParams(N=128, **FIG2)
    U = one_period_operator(p)
    return p, U, floquet_decompose(U, source=p)


@pytest.fixture(scope="session")
def fig3():
    p = TrapParams(N=256, **FIG3)
    U = one_period_operator(p)
    return p, U, floquet_decompose(U, source=p)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion; returns the overall verdict."""

    def _report(tag, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{'ok' if passed else 'FAIL'} {text}" for text, passed in checks)
        line = f"{tag}: {'PASS' if ok else 'FAIL'} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
