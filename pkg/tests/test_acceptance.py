"""Acceptance gate: one test per criterion, each printing a pass/fail line."""
import subprocess
import sys

import pytest

from minsurf import acceptance

from conftest import LINES


def _check(n):
    res = getattr(acceptance, f"criterion_{n}")()
    print(res.line())
    LINES.append(res.line())
    assert res.passed, res.details


def test_criterion_01_kdv_hierarchy():
    _check(1)


def test_criterion_02_miura_chain():
    _check(2)


def test_criterion_03_shiffman_vanishing():
    _check(3)


def test_criterion_04_jacobi_property():
    _check(4)


def test_criterion_05_flux():
    _check(5)


def test_criterion_06_riemann_mean_curvature():
    _check(6)


def test_criterion_07_decay_classifier():
    _check(7)


def test_criterion_08_gauss_degree():
    _check(8)


def test_criterion_09_mse_solver():
    _check(9)


def test_criterion_10_area_growth():
    _check(10)


def test_criterion_11_limits():
    _check(11)


@pytest.mark.slow
def test_criterion_12_selftest_determinism(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"selftest{k}.json"
        proc = subprocess.run([sys.executable, "-m", "minsurf.cli", "selftest", "--out", str(path)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    same = outs[0] == outs[1]
    line = f"[{'PASS' if same else 'FAIL'}] 12 Selftest reports are byte-identical"
    print(line)
    LINES.append(line)
    assert same
