"""Built-in property suites: invariances, stability, and path equivalence.

Each check runs the real pipeline on seeded synthetic data and verifies
a structural property end to end. The experiment runner's selftest mode
executes all of them; the test suite reuses them with larger budgets.
Every function returns a list of human-readable failure strings (empty
means the property held).
"""

from __future__ import annotations

import numpy as np

from . import corrlars, reference
from .cellwise import CorrelationStructure, correlation_structure, ddc_impute
from .pipeline import fit_ensemble
from .rng import make_rng, split_seed
from .selection import SelectionConfig, run_selection
from .simulate import SimConfig, generate_clean


def _generic_dataset(seed: int, n: int = 50, p: int = 80):
    """Clean block-correlated data with clear signal; generic position a.s."""
    cfg = SimConfig(n=n, p=p, sparsity=10, snr=2.0, block_size=5,
                    rho_within=0.8, rho_background=0.2, seed=seed)
    data = generate_clean(cfg)
    return data.y, data.X


def _selection_cfg(seed: int, K: int = 5) -> SelectionConfig:
    return SelectionConfig(K=K, tau=0.01, cv_folds=5, intercept=True, seed=seed)


def _affine_maps(rng: np.random.Generator, count: int):
    c = rng.uniform(0.1, 3.0, count) * rng.choice([-1.0, 1.0], count)
    a = rng.uniform(-5.0, 5.0, count)
    return c, a


def check_affine_invariance(n_runs: int = 20, n: int = 50, p: int = 80) -> list[str]:
    """Per-column affine maps of [y, X] must not change the selected sets."""
    failures = []
    for run in range(n_runs):
        y, X = _generic_dataset(seed=split_seed(101, run), n=n, p=p)
        rng = make_rng(split_seed(202, run))
        c, a = _affine_maps(rng, p + 1)
        y2 = c[0] * y + a[0]
        X2 = X * c[1:] + a[1:]
        cfg = _selection_cfg(seed=split_seed(303, run))
        res1 = fit_ensemble(y, X, cfg).selection
        res2 = fit_ensemble(y2, X2, cfg).selection
        if [sorted(s) for s in res1.sets] != [sorted(s) for s in res2.sets]:
            failures.append(f"affine run {run}: selected sets differ")
    return failures


def check_permutation_equivariance(n_runs: int = 20, n: int = 50,
                                   p: int = 80) -> list[str]:
    """Column permutation must permute the selected sets (up to model labels)."""
    failures = []
    for run in range(n_runs):
        y, X = _generic_dataset(seed=split_seed(404, run), n=n, p=p)
        rng = make_rng(split_seed(505, run))
        perm = rng.permutation(p)
        Xp = X[:, perm]
        cfg = _selection_cfg(seed=split_seed(606, run))
        res1 = fit_ensemble(y, X, cfg).selection
        res2 = fit_ensemble(y, Xp, cfg).selection
        # column j of Xp is column perm[j] of X: map selections back
        fam1 = sorted(tuple(sorted(s)) for s in res1.sets)
        fam2 = sorted(tuple(sorted(int(perm[j]) for j in s)) for s in res2.sets)
        if fam1 != fam2:
            failures.append(f"permutation run {run}: set families differ")
    return failures


def check_intercept_invariance(n_runs: int = 20, n: int = 50,
                               p: int = 40) -> list[str]:
    """The winner sequence must ignore the intercept on column-centered data.

    The selection stage consumes the cleaned matrix, so that is what gets
    centered: one shared foundation is built, its columns are centered,
    and the competition runs with the intercept on and off.
    """
    failures = []
    for run in range(n_runs):
        y, X = _generic_dataset(seed=split_seed(707, run), n=n, p=p)
        imp = ddc_impute(np.column_stack([y, X]))
        imp.Z_imp -= imp.Z_imp.mean(axis=0)
        structure = correlation_structure(imp)
        cfg_on = _selection_cfg(seed=split_seed(808, run))
        cfg_off = SelectionConfig(K=cfg_on.K, tau=cfg_on.tau,
                                  cv_folds=cfg_on.cv_folds, intercept=False,
                                  seed=cfg_on.seed)
        res_on = run_selection(structure, imp, cfg_on)
        res_off = run_selection(structure, imp, cfg_off)
        if res_on.winner_sequence() != res_off.winner_sequence():
            failures.append(f"intercept run {run}: winner sequences differ")
    return failures


def check_local_stability(n_runs: int = 20, n: int = 50, p: int = 80,
                          eps: float = 1e-9) -> list[str]:
    """Entrywise perturbations of the cleaned inputs must not move any decision."""
    failures = []
    for run in range(n_runs):
        y, X = _generic_dataset(seed=split_seed(909, run), n=n, p=p)
        imp = ddc_impute(np.column_stack([y, X]))
        structure = correlation_structure(imp)
        cfg = _selection_cfg(seed=split_seed(1010, run))
        res1 = run_selection(structure, imp, cfg)

        rng = make_rng(split_seed(1111, run))
        pert = CorrelationStructure(
            R_X=structure.R_X + rng.uniform(-eps, eps, structure.R_X.shape),
            r_y=structure.r_y + rng.uniform(-eps, eps, structure.r_y.shape),
        )
        imp2 = type(imp)(
            Z_imp=imp.Z_imp + rng.uniform(-eps, eps, imp.Z_imp.shape),
            flags=imp.flags.copy(),
            scales=imp.scales,
        )
        res2 = run_selection(pert, imp2, cfg)
        same = (res1.winner_sequence() == res2.winner_sequence()
                and res1.stop_reason == res2.stop_reason)
        if not same:
            failures.append(f"stability run {run}: trace changed under {eps} noise")
    return failures


def check_path_equivalence(n_runs: int = 50, n: int = 60, p: int = 25,
                           steps: int = 20, tol: float = 1e-8) -> list[str]:
    """Correlation-space path must match data-space least-angle regression."""
    failures = []
    for run in range(n_runs):
        rng = make_rng(split_seed(1212, run))
        Xraw = rng.standard_normal((n, p)) @ np.diag(rng.uniform(0.5, 2.0, p))
        beta = np.zeros(p)
        beta[rng.choice(p, size=5, replace=False)] = rng.uniform(1, 3, 5)
        yraw = Xraw @ beta + rng.standard_normal(n)
        X = reference.standardize_columns(Xraw)
        yc = yraw - yraw.mean()
        y = yc / np.linalg.norm(yc)

        oracle = reference.classical_lars_path(X, y, steps)
        R = X.T @ X
        r_y = X.T @ y
        order, sizes, states = corrlars.greedy_path(R, r_y, steps)
        if order != oracle.entry_order[:len(order)]:
            failures.append(f"path run {run}: entry order differs")
            continue
        diffs = np.abs(np.asarray(sizes) - np.asarray(oracle.step_sizes[:len(sizes)]))
        if len(sizes) < min(steps, p) or diffs.max() > tol:
            failures.append(f"path run {run}: step sizes differ by {diffs.max():.2e}")
        for state in states:
            lv = state.active_level
            for i in state.active:
                if abs(abs(state.corr_state[i]) - lv) > 1e-8:
                    failures.append(f"path run {run}: equi-correlation violated")
                    break
    return failures


def run_all(verbose: bool = True) -> bool:
    """Run every property suite; True when all pass."""
    suites = [
        ("path-equivalence", lambda: check_path_equivalence(n_runs=10)),
        ("affine-invariance", lambda: check_affine_invariance(n_runs=5)),
        ("permutation-equivariance", lambda: check_permutation_equivariance(n_runs=5)),
        ("intercept-invariance", lambda: check_intercept_invariance(n_runs=5)),
        ("local-stability", lambda: check_local_stability(n_runs=5)),
    ]
    ok = True
    for name, fn in suites:
        failures = fn()
        status = "PASS" if not failures else "FAIL"
        if failures:
            ok = False
        if verbose:
            print(f"selfcheck {name}: {status}")
            for msg in failures:
                print(f"  {msg}")
    return ok
