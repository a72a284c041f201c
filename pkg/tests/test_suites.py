"""Verification suite runners: determinism and structure."""

import pytest

from itermellin.quadrature import EvalParams
from itermellin.suites import SUITES, run_suite


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nonsense")


def test_suite_names():
    assert set(SUITES) == {
        "functional",
        "shuffle",
        "residues",
        "eisenstein-id",
        "mzv",
        "qsums",
        "eichler",
        "binding",
    }


def test_determinism_same_seed():
    a = run_suite("functional", seed=3, trials=4, params=EvalParams())
    b = run_suite("functional", seed=3, trials=4, params=EvalParams())
    assert [c.to_dict() for c in a] == [c.to_dict() for c in b]


def test_mzv_suite_passes():
    for case in run_suite("mzv", seed=0, trials=5):
        assert case.passed, case


def test_case_record_shape():
    (case, *_) = run_suite("binding", seed=1, trials=3)
    d = case.to_dict()
    assert set(d) == {"suite", "case", "defect", "tolerance", "passed"}
