"""Acceptance criteria as tests, one per criterion, at full stated scale
and tolerance.

All ten tests share one module-scope context so ensembles required by
several criteria (the family runs reused by the ordering checks) are
computed once.  Each test prints its criterion's one-line verdict and
asserts on it; the printed line carries every measured value, target,
and tolerance so a failure is self-describing.

This file takes roughly half an hour: criterion 7 alone performs about
5500 witness-program solves.
"""

from haarquench.acceptance import CRITERIA, Context

_CONTEXT = Context(master_seed=42, scale=1.0, n_workers=1)
_BY_INDEX = {index: (name, fn) for index, name, fn in CRITERIA}


def _run_criterion(index):
    name, fn = _BY_INDEX[index]
    checks = fn(_CONTEXT)
    line = (f"criterion {index:>2} {name}: "
            f"{'PASS' if checks.ok else 'FAIL'} - {checks.detail()}")
    print(line)
    assert checks.ok, line


def test_criterion_01_clean_two_qubit_moments():
    _run_criterion(1)


def test_criterion_02_single_target_disorder_moments():
    _run_criterion(2)


def test_criterion_03_two_target_disorder_moments():
    _run_criterion(3)


def test_criterion_04_four_target_disorder_moments():
    _run_criterion(4)


def test_criterion_05_white_noise_ensembles():
    _run_criterion(5)


def test_criterion_06_disorder_strength_sweep():
    _run_criterion(6)


def test_criterion_07_three_qubit_ensembles():
    _run_criterion(7)


def test_criterion_08_spread_ordering():
    _run_criterion(8)


def test_criterion_09_witness_monotone_properties():
    _run_criterion(9)


def test_criterion_10_concurrence_numerics():
    _run_criterion(10)
