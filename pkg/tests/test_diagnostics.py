import json

import numpy as np
import pytest

from vireg.diagnostics import (
    SuiteResult,
    _sample_member,
    cocoercivity_suite,
    monotonicity_suite,
    run_all,
    sign_flipped,
    stability_suite,
    source_condition_suite,
    contraction_suite,
)


def test_run_all_passes():
    results = run_all("example1", n_intervals=200, seed=0)
    assert len(results) == 11
    for res in results:
        assert res.passed, res.line()


def test_run_all_example2_passes():
    results = run_all("example2", n_intervals=200, seed=1)
    assert all(r.passed for r in results), "\n".join(r.line() for r in results)


def test_sign_flipped_negative_control(specs):
    op = sign_flipped(specs["example1"].operator())
    mono = monotonicity_suite(op, kappa=0.0, seed=0, n_pairs=50)
    assert not mono.passed
    coco = cocoercivity_suite(op, kappa=0.5, tau=0.25, seed=0, n_pairs=50)
    assert not coco.passed
    # the offending pair is serialized into the detail payload
    payload = json.loads(coco.detail)
    assert set(payload) >= {"u", "v", "value"}
    assert len(payload["u"]) == 201


def test_run_all_with_injected_operator_fails(specs):
    results = run_all("example1", seed=0, operator=sign_flipped(specs["example1"].operator()))
    assert not all(r.passed for r in results)


def test_sample_member_is_member(grid200, rng):
    for smooth in (False, True):
        u = _sample_member(grid200, 0.4, rng, smooth=smooth)
        assert np.all(u.values >= 0.4 - 1e-12)


def test_suite_result_line():
    line = SuiteResult("demo", True, -1.0, 0.0).line()
    assert line.startswith("PASS")
    assert "demo" in line
    assert SuiteResult("demo", False, 1.0, 0.0).line().startswith("FAIL")


def test_individual_suites(specs):
    spec = specs["example1"]
    assert stability_suite(spec, seed=0).passed
    assert source_condition_suite(spec).passed
    assert contraction_suite(spec, seed=0).passed
