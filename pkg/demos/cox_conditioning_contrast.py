"""Why the conditioning set matters for Cox regression.

Adding five future subjects to a small survival study should never make the
observed data look *more* informative than the completed data. Yet if the
expectation conditions on the observed failure times themselves (instead of
only their ranks, which is all the partial likelihood uses), the measure can
exceed 1. This script shows both conditionings on one simulated dataset,
then summarizes the effect over many datasets.
"""

import numpy as np

from relinfo import MCConfig, ri1_cox_correct, ri1_cox_naive, simulate_ph_binary
from relinfo.cox import conditioning_anomaly_study

rng = np.random.default_rng(7)
censored, uncensored = simulate_ph_binary(
    n=20, beta_true=0.5, rng=rng, censoring_rate=0.2)
z_new = rng.integers(0, 2, size=5).astype(float)[:, None]

config = MCConfig(n_draws=5_000, seed=7)

naive = ri1_cox_naive(censored, 5, z_new, mc_config=config)
print(f"naive  (times fixed): {naive.estimate:.4f} +/- {naive.mc_standard_error:.4f}")

correct = ri1_cox_correct(uncensored, 5, z_new, mc_config=config)
print(f"correct (ranks only): {correct.estimate:.4f} +/- {correct.mc_standard_error:.4f}")

# One dataset is an anecdote. Across a hundred, the naive conditioning
# breaks the unit ceiling on a visible fraction of them while the correct
# one never does.
study = conditioning_anomaly_study(
    n_datasets=50, n_subjects=20, n_new=5, beta_true=0.5,
    censoring_rate=0.2, n_draws=2_000, seed=7)
print(f"\nover {len(study.naive_estimates)} simulated datasets:")
print(f"  naive measure > 1 on {study.fraction_naive_above_one:.0%} of datasets "
      f"(max {np.nanmax(study.naive_estimates):.3f})")
print(f"  correct measure max excess over 1: "
      f"{study.max_correct_excess_se:.2f} standard errors")
