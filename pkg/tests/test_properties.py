"""Structural property suites at reduced budgets (full budgets run in
test_acceptance.py)."""

import numpy as np

from cellens import selfcheck
from cellens.pipeline import passthrough_imputation


def test_path_equivalence_property():
    assert selfcheck.check_path_equivalence(n_runs=8) == []


def test_affine_invariance_property():
    assert selfcheck.check_affine_invariance(n_runs=4) == []


def test_permutation_equivariance_property():
    assert selfcheck.check_permutation_equivariance(n_runs=4) == []


def test_intercept_invariance_property():
    assert selfcheck.check_intercept_invariance(n_runs=6) == []


def test_local_stability_property():
    assert selfcheck.check_local_stability(n_runs=4) == []


def test_passthrough_imputation_identity():
    rng = np.random.default_rng(0)
    Z = rng.standard_normal((20, 4))
    imp = passthrough_imputation(Z)
    assert np.array_equal(imp.Z_imp, Z)
    assert not imp.flags.any()


def test_run_all_passes():
    assert selfcheck.run_all(verbose=False)
