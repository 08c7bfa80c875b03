"""A short Monte Carlo run in both scenarios, printed as CSV.

Scenario 1 zeros one index per class and should always succeed when the
true folds fit in the box. Scenario 2 zeros random indices and succeeds
with the exact probability reported next to the empirical rate.
"""
from moddft.harness import ExperimentConfig, monte_carlo

for scenario in ("s1_hitting", "s2_uniform_random"):
    rep = monte_carlo(ExperimentConfig(N_list=(5, 6, 8, 12), trials=200, scenario=scenario, seed=1))
    print(rep.to_csv())
