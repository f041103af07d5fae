"""Expected branch counts N_k[K] three ways, and the strong Horton law."""

import math

from hortonlab import (
    TokunagaSequence,
    verify_strong_horton,
    zeta1_by_series,
    zeta1_geometric_closed_form,
    zeta_by_recursion,
)

seq = TokunagaSequence.geometric(1, 2)

print(zeta_by_recursion(seq, 6).zeta)            # N_1[6] ... N_6[6]
print(zeta1_by_series(seq, 6))                   # N_1[1] ... N_1[6]
print([zeta1_geometric_closed_form(1, 2, K) for K in range(6)])

# xi_K(j) = N_j[K] / N_1[K] approaches R^(1-j) = 4^(1-j)
rep = verify_strong_horton(seq, 30, 6)
print("R estimate", rep.R_estimate, "converged", rep.converged)
for j, err in rep.per_j_errors.items():
    print(j, err)

# a super-exponential head has no Horton exponent; the ratios keep climbing
fact = TokunagaSequence.explicit([math.factorial(j) for j in range(1, 15)])
rep = verify_strong_horton(fact, 15, 6)
print(rep.ratio_sequence)
print("converged", rep.converged)
