"""Pruning an order-(K+1) random tree gives an order-K random tree."""

from hortonlab import SamplerConfig, TokunagaSequence, prune_invariance_check

rep = prune_invariance_check(SamplerConfig(TokunagaSequence.geometric(1, 2), 4, seed=3, samples=5000))
print("identity violations", rep.identity_violations)
for i, j in rep.direct.pairs():
    print(i, j, rep.pruned.tokunaga_hat[i, j], rep.direct.tokunaga_hat[i, j], "z", round(rep.z_pruned_vs_direct[i, j], 2))
