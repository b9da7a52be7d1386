"""Flagging deviating cells and imputing them.

The detector standardizes each column robustly (median / 1.4826 MAD),
predicts every standardized cell from its most correlated partner
columns, flags cells whose residual is too large, and replaces exactly
those cells. Columns without informative partners fall back to marginal
detection. The demo measures detection quality against the simulator's
ground-truth masks and shows the per-column affine equivariance that the
downstream selection relies on.
"""

import numpy as np

from cellens import (ContaminationSpec, SimConfig, block_covariance,
                     contaminate, correlation_structure, ddc_impute,
                     generate_clean)

cfg = SimConfig(n=100, p=50, sparsity=50, snr=1.0, block_size=25,
                rho_within=0.8, rho_background=0.2, seed=3)
clean = generate_clean(cfg)
sigma = block_covariance(cfg)
obs = contaminate(clean, ContaminationSpec(scenario="CellwiseMarginal",
                                           alpha=0.05, marginal_shift=10.0),
                  sigma, seed=4)

# the detector works on the joint matrix with the response in column 0
Z = np.column_stack([obs.y, obs.X])
imp = ddc_impute(Z)

mask = obs.truth.mask_X.astype(bool)
flags = imp.flags[:, 1:]
detection = (flags & mask).sum() / mask.sum()
false_rate = (flags & ~mask).sum() / (~mask).sum()
print(f"flagged {flags.sum()} predictor cells; "
      f"detection {detection:.1%}, false-flag rate {false_rate:.2%}")

# imputed values land near the clean truth
err_before = np.abs(obs.X[mask] - clean.X[mask])
err_after = np.abs(imp.X_imp[mask] - clean.X[mask])
print(f"mean |cell - truth| on corrupted cells: "
      f"{err_before.mean():.2f} before, {err_after.mean():.2f} after imputation")

# untouched cells are bit-identical
assert np.array_equal(imp.Z_imp[~imp.flags], Z[~imp.flags])

# ---------------------------------------------------------------------------
# per-column affine equivariance: rescaling/shifting columns commutes
# with the imputation, so unit choices cannot change what gets flagged
# ---------------------------------------------------------------------------
rng = np.random.default_rng(5)
c = rng.uniform(0.5, 2.0, Z.shape[1]) * rng.choice([-1.0, 1.0], Z.shape[1])
a = rng.uniform(-3.0, 3.0, Z.shape[1])
imp_t = ddc_impute(Z * c + a)
print(f"\nflags identical under column rescaling: "
      f"{np.array_equal(imp.flags, imp_t.flags)}")
print(f"max |imputed' - (c * imputed + a)|: "
      f"{np.max(np.abs(imp_t.Z_imp - (imp.Z_imp * c + a))):.2e}")

# ---------------------------------------------------------------------------
# the cleaned matrix yields the correlation structure used downstream
# ---------------------------------------------------------------------------
structure = correlation_structure(imp)
print(f"\npredictor correlation matrix: {structure.R_X.shape}, "
      f"min eigenvalue {np.linalg.eigvalsh(structure.R_X).min():.2e}")
raw_ry = np.corrcoef(np.column_stack([obs.y, obs.X]), rowvar=False)[0, 1:]
print(f"strongest response correlation, raw vs cleaned: "
      f"{np.abs(raw_ry).max():.3f} vs {np.abs(structure.r_y).max():.3f}")
