"""Competitive ensemble selection arbitrated by cross-validation.

``K`` sub-models share one global pool of predictors. Each round, every
sub-model asks its correlation-space path for the predictor it would add
next; the predictive benefit of each candidate move is measured by
v-fold cross-validated least squares on the imputed data, and the single
best move wins the round. The winner's model takes the predictor (which
leaves the pool for everyone), updates its path state, and the loop
continues until the best relative benefit falls below the tolerance
``tau`` or no moves remain. Because every predictor is assigned at most
once, the returned sets are disjoint by construction.

One fixed fold assignment is drawn up front and reused for every
cross-validation call in the run, which makes benefits comparable across
models and rounds and makes the whole procedure a deterministic function
of (inputs, seed).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import corrlars
from .cellwise import CorrelationStructure, ImputationResult
from .errors import InvalidConfig, NotPositiveDefinite, RankDeficient
from .linalg import ols_fit
from .rng import make_rng

STOP_BELOW_TOLERANCE = "BelowTolerance"
STOP_NO_CANDIDATES = "NoCandidates"
STOP_POOL_EXHAUSTED = "PoolExhausted"
STOP_MAX_VARS = "MaxVars"


@dataclass(frozen=True)
class SelectionConfig:
    """Ensemble selection settings.

    K : number of sub-models competing for predictors
    tau : minimum relative cross-validation improvement to keep going
    cv_folds : folds for the least-squares arbitration
    max_vars : cap on the total number of selected predictors; defaults
        to ``min(n - cv_folds, p)`` so every final fit stays overdetermined
    intercept : include an intercept in the internal least-squares fits
        (and in the final robust fits)
    seed : drives the fold assignment and random tie-breaking
    """

    K: int = 10
    tau: float = 0.01
    cv_folds: int = 5
    max_vars: Optional[int] = None
    intercept: bool = True
    seed: int = 0

    def validate(self, n: int, p: int) -> None:
        if self.K < 1:
            raise InvalidConfig(f"K={self.K} must be >= 1")
        if not self.tau > 0:
            raise InvalidConfig(f"tau={self.tau} must be positive")
        if self.cv_folds < 2 or self.cv_folds > n:
            raise InvalidConfig(f"cv_folds={self.cv_folds} outside [2, n={n}]")
        if self.max_vars is not None and not 0 <= self.max_vars <= p:
            raise InvalidConfig(f"max_vars={self.max_vars} outside [0, p={p}]")

    def resolved_max_vars(self, n: int, p: int) -> int:
        if self.max_vars is not None:
            return self.max_vars
        return min(n - self.cv_folds, p)


@dataclass
class Proposal:
    """One sub-model's candidate move in a round."""

    model: int
    candidate: int
    gamma: float
    benefit: float
    lars: corrlars.LarsProposal
    cv_new: float


@dataclass
class CompetitionRecord:
    """Everything that happened in one round of the tournament."""

    iteration: int
    proposals: list[Proposal]
    winner: Optional[tuple[int, int]] = None
    stop_reason: Optional[str] = None


@dataclass
class SelectionResult:
    """Disjoint selected index sets plus the full per-round trace."""

    sets: list[list[int]]
    trace: list[CompetitionRecord]
    stop_reason: str

    def union(self) -> set[int]:
        out: set[int] = set()
        for s in self.sets:
            out.update(s)
        return out

    def winner_sequence(self) -> list[tuple[int, int]]:
        return [rec.winner for rec in self.trace if rec.winner is not None]


def fold_assignment(n: int, v: int, rng: np.random.Generator) -> np.ndarray:
    """Random partition of ``n`` rows into ``v`` near-equal folds.

    Returns an integer label array; fold sizes differ by at most one.
    """
    if v < 1 or v > n:
        raise InvalidConfig(f"cv_folds={v} outside [1, n={n}]")
    perm = rng.permutation(n)
    labels = np.empty(n, dtype=int)
    base = n // v
    extra = n % v
    start = 0
    for f in range(v):
        size = base + (1 if f < extra else 0)
        labels[perm[start:start + size]] = f
        start += size
    return labels


def cv_error(imp: ImputationResult, subset, folds: np.ndarray,
             intercept: bool) -> float:
    """Out-of-fold mean squared error of least squares on a predictor subset.

    The intercept is absorbed by centering the response and the subset
    columns at their full-sample means before the per-fold origin fits,
    which makes the arbitration exactly location-invariant (fitting a
    per-fold free constant would not be: training-fold means of centered
    data are O(1/sqrt(n)) away from zero and flip near-boundary
    decisions). The empty subset scores the global-mean predictor when
    ``intercept`` is on and the zero predictor when off.

    Raises
    ------
    RankDeficient
        If any fold's design is singular; callers treat the proposal as
        having benefit -inf rather than aborting the run.
    InvalidConfig
        If the subset is too large for the smallest training fold.
    """
    subset = list(subset)
    y = imp.y_imp
    X = imp.X_imp[:, subset] if subset else np.empty((len(y), 0))
    n = len(y)
    v = int(folds.max()) + 1
    min_train = n - max(np.bincount(folds, minlength=v))
    if len(subset) + int(intercept) >= min_train:
        raise InvalidConfig(
            f"subset of size {len(subset)} (+intercept={intercept}) needs more "
            f"than {min_train} training rows per fold"
        )
    if intercept:
        y = y - y.mean()
        if subset:
            X = X - X.mean(axis=0)
    sq_sum = 0.0
    for f in range(v):
        test = folds == f
        train = ~test
        coef, _ = ols_fit(X[train], y[train], intercept=False)
        pred = X[test] @ coef if subset else np.zeros(int(test.sum()))
        sq_sum += float(((y[test] - pred) ** 2).sum())
    return sq_sum / n


def run_selection(structure: CorrelationStructure, imp: ImputationResult,
                  cfg: SelectionConfig) -> SelectionResult:
    """Run the full K-model competition.

    Parameters
    ----------
    structure : CorrelationStructure
        Predictor correlations and response correlations feeding the
        path engines.
    imp : ImputationResult
        Cleaned data for the cross-validation arbiter.
    cfg : SelectionConfig

    Returns
    -------
    SelectionResult
    """
    p = len(structure.r_y)
    n = imp.Z_imp.shape[0]
    cfg.validate(n, p)
    if structure.R_X.shape != (p, p):
        raise InvalidConfig("R_X and r_y disagree on p")
    if imp.X_imp.shape[1] != p:
        raise InvalidConfig("imputed data and correlations disagree on p")
    max_vars = cfg.resolved_max_vars(n, p)
    rng = make_rng(cfg.seed)
    folds = fold_assignment(n, cfg.cv_folds, rng)
    min_train = n - max(np.bincount(folds, minlength=cfg.cv_folds))

    states = [corrlars.SubModelState.initial(structure.r_y) for _ in range(cfg.K)]
    available: list[int] = list(range(p))
    current_cv = [cv_error(imp, [], folds, cfg.intercept) for _ in range(cfg.K)]
    trace: list[CompetitionRecord] = []
    total_selected = 0
    iteration = 0
    stop_reason = None

    while True:
        iteration += 1
        record = CompetitionRecord(iteration=iteration, proposals=[])
        if total_selected >= max_vars:
            stop_reason = STOP_MAX_VARS
            record.stop_reason = stop_reason
            trace.append(record)
            break
        if not available:
            stop_reason = STOP_POOL_EXHAUSTED
            record.stop_reason = stop_reason
            trace.append(record)
            break
        for k in range(cfg.K):
            # A model at fold-training capacity stops proposing; the rest
            # keep competing.
            if len(states[k].active) + 1 + int(cfg.intercept) >= min_train:
                continue
            try:
                prop = corrlars.propose(structure.R_X, states[k], available)
            except NotPositiveDefinite:
                continue
            if prop.candidate is None:
                continue
            try:
                new_cv = cv_error(imp, states[k].active + [prop.candidate],
                                  folds, cfg.intercept)
                benefit = current_cv[k] - new_cv
            except RankDeficient:
                new_cv = np.inf
                benefit = -np.inf
            record.proposals.append(Proposal(
                model=k, candidate=prop.candidate, gamma=prop.step,
                benefit=benefit, lars=prop, cv_new=new_cv,
            ))
        if not record.proposals:
            stop_reason = STOP_NO_CANDIDATES
            record.stop_reason = stop_reason
            trace.append(record)
            break
        best = max(pr.benefit for pr in record.proposals)
        tied = [pr for pr in record.proposals if pr.benefit == best]
        if len(tied) > 1:
            # exactly one uniform draw per tie event keeps seeded runs
            # reproducible regardless of how many proposals tie
            u = rng.random()
            pick = tied[min(int(u * len(tied)), len(tied) - 1)]
        else:
            pick = tied[0]
        base = current_cv[pick.model]
        accept = pick.benefit > 0 and base > 0 and pick.benefit / base > cfg.tau
        if not accept:
            stop_reason = STOP_BELOW_TOLERANCE
            record.stop_reason = stop_reason
            trace.append(record)
            break
        states[pick.model] = corrlars.apply_step(states[pick.model], pick.lars,
                                                 available)
        available.remove(pick.candidate)
        current_cv[pick.model] = pick.cv_new
        total_selected += 1
        record.winner = (pick.model, pick.candidate)
        if total_selected >= max_vars:
            stop_reason = STOP_MAX_VARS
            record.stop_reason = stop_reason
            trace.append(record)
            break
        if not available:
            stop_reason = STOP_POOL_EXHAUSTED
            record.stop_reason = stop_reason
            trace.append(record)
            break
        trace.append(record)

    sets = [list(state.active) for state in states]
    return SelectionResult(sets=sets, trace=trace, stop_reason=stop_reason)


def trace_to_csv(result: SelectionResult, path: str) -> None:
    """Write the competition trace, one row per proposal."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "model", "candidate", "gamma", "benefit",
                         "winner", "stop_reason"])
        for rec in result.trace:
            for pr in rec.proposals:
                is_winner = rec.winner is not None and rec.winner == (pr.model,
                                                                      pr.candidate)
                writer.writerow([
                    rec.iteration, pr.model, pr.candidate, repr(pr.gamma),
                    repr(pr.benefit), int(is_winner), rec.stop_reason or "",
                ])
            if not rec.proposals:
                writer.writerow([rec.iteration, "", "", "", "", 0,
                                 rec.stop_reason or ""])
