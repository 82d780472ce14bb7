"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import mpmath
import numpy as np
import pytest

from fracvisc._validation import log_grid

mpmath.mp.dps = 40


def mp_branch(E_c, tau, alpha, beta, x):
    """Complex-power branch modulus in arbitrary precision; returns (E', E'')."""
    z = mpmath.mpc(0, 1) * mpmath.mpf(x) * mpmath.mpf(tau)
    e = mpmath.mpf(E_c) * z ** mpmath.mpf(alpha) / (1 + z ** (mpmath.mpf(alpha) - mpmath.mpf(beta)))
    return e.real, e.imag


def mp_model(p, x):
    """Two-branch model in arbitrary precision for a 7-vector ``p``."""
    r1, i1 = mp_branch(p[0], p[1], p[2], p[3], x)
    r2, i2 = mp_branch(p[4], p[5], p[6], 0, x)
    return r1 + r2, i1 + i2


def complex_branch(E_c, tau, alpha, beta, x):
    """Complex-power branch modulus in double precision (principal branch)."""
    z = 1j * np.asarray(x, dtype=float) * tau
    e = E_c * z ** alpha / (1 + z ** (alpha - beta))
    return e.real, e.imag


@pytest.fixture(scope="session")
def grid():
    return log_grid()


@pytest.fixture
def report(capsys):
    """Print one criterion line past pytest's output capture."""
    def _report(label: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok
    return _report
