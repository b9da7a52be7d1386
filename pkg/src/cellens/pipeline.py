"""End-to-end fit: clean the cells, select by competition, fit robustly."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cellwise import (CorrelationStructure, DdcConfig, ImputationResult,
                       RobustScale, correlation_structure, ddc_impute)
from .robustfit import EnsembleModel, fit_ensemble_models, predict
from .selection import SelectionConfig, SelectionResult, run_selection


@dataclass
class FitResult:
    """Everything produced by one end-to-end fit."""

    model: EnsembleModel
    selection: SelectionResult
    imputation: ImputationResult
    structure: CorrelationStructure

    def predict(self, Xnew: np.ndarray) -> np.ndarray:
        return predict(self.model, Xnew)

    def selected_union(self) -> set[int]:
        return self.selection.union()


def passthrough_imputation(Z: np.ndarray) -> ImputationResult:
    """An ImputationResult that leaves the data untouched (no cleaning).

    Used by ablations that skip the detection stage; correlations are
    then computed on the raw, possibly contaminated matrix.
    """
    Z = np.asarray(Z, dtype=float)
    n, C = Z.shape
    return ImputationResult(
        Z_imp=Z.copy(),
        flags=np.zeros((n, C), dtype=bool),
        scales=RobustScale(location=np.zeros(C), scale=np.ones(C)),
    )


def fit_ensemble(y: np.ndarray, X: np.ndarray, cfg: SelectionConfig,
                 ddc: Optional[DdcConfig] = None,
                 impute: bool = True) -> FitResult:
    """Run the full three-stage procedure on raw data.

    Parameters
    ----------
    y, X : response and predictor matrix
    cfg : SelectionConfig
    ddc : DdcConfig, optional
        Detection tuning; defaults apply when omitted.
    impute : bool
        When False the detection stage is skipped and the selection runs
        on correlations of the raw data (ablation mode).
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    Z = np.column_stack([y, X])
    if impute:
        imp = ddc_impute(Z, ddc)
    else:
        imp = passthrough_imputation(Z)
    structure = correlation_structure(imp)
    selection = run_selection(structure, imp, cfg)
    model = fit_ensemble_models(imp.y_imp, imp.X_imp, selection.sets,
                                intercept=cfg.intercept, seed=cfg.seed)
    return FitResult(model=model, selection=selection, imputation=imp,
                     structure=structure)
