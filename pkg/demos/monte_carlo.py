"""Random trees with prescribed Tokunaga coefficients, and their averages."""

from hortonlab import (
    SamplerConfig,
    TokunagaSequence,
    estimate,
    horton_statistics,
    sample_tree,
    serialize_tree,
    zeta_by_recursion,
)

seq = TokunagaSequence.geometric(1, 2)

one = sample_tree(SamplerConfig(seq, 3, seed=1), 0)
print(serialize_tree(one))
print(horton_statistics(one).branch_counts)

cfg = SamplerConfig(seq, 6, seed=1, samples=5000)
rep = estimate(cfg)
theory = zeta_by_recursion(seq, 6).zeta
for k in range(1, 7):
    print(k, rep.mean_Nk[k], "+-", rep.se_Nk[k], "theory", theory[k - 1])

# T_hat[i, j] should not depend on i, j except through j - i
for i, j in rep.pairs():
    print(i, j, round(rep.tokunaga_hat[i, j], 3), "+-", round(rep.se_tokunaga[i, j], 3), "expected", seq.term(j - i))
