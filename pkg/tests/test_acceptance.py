"""Acceptance criteria 1-10. Each test records a PASS/FAIL line (printed in
the terminal summary) and then asserts on the same outcome.

Run standalone with ``python tests/test_acceptance.py`` to print only the
ten lines.
"""

import sys

import pytest

import acceptance_lib as acc

RESULTS: dict[int, acc.Outcome] = {}


def _check(number, *args):
    outcome = acc.CRITERIA[number][1](*args)
    RESULTS[number] = outcome
    print(acc.line(number, outcome))
    assert outcome.passed, outcome.detail


def test_criterion_01_conjugate_limit():
    _check(1)


def test_criterion_02_gradient_checks():
    _check(2)


def test_criterion_03_fixed_point_elbo_oracle():
    _check(3)


def test_criterion_04_kernel_positivity():
    _check(4)


def test_criterion_05_memory_asymptote():
    _check(5)


def test_criterion_06_change_vs_outlier():
    _check(6)


def test_criterion_07_forward_backward():
    _check(7)


def test_criterion_08_ar_robustness():
    _check(8)


def test_criterion_09_optimizer_robustness():
    _check(9)


def test_criterion_10_determinism(tmp_path):
    _check(10, str(tmp_path))


if __name__ == "__main__":
    import tempfile

    failed = 0
    for n, (_, fn) in acc.CRITERIA.items():
        if n == 10:
            with tempfile.TemporaryDirectory() as d:
                out = fn(d)
        else:
            out = fn()
        failed += not out.passed
        print(acc.line(n, out), flush=True)
    sys.exit(1 if failed else 0)
