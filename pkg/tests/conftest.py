import mpmath as mp
import numpy as np
import pytest


def mlf_reference(beta, x, gam=1.0, dps=30):
    """High-precision ``E_{beta,gam}(-x)`` used as a test oracle.

    Taylor series at 30 digits for x <= 2, Talbot inversion of the Laplace
    transform ``s**(beta-gam) / (s**beta + x)`` at unit time beyond.
    """
    with mp.workdps(dps):
        b, g, xx = mp.mpf(beta), mp.mpf(gam), mp.mpf(x)
        if xx <= 2:
            return float(mp.nsum(lambda n: (-xx) ** n / mp.gamma(b * n + g), [0, mp.inf]))
        return float(mp.invertlaplace(lambda s: s ** (b - g) / (s**b + xx), 1, method="talbot"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
