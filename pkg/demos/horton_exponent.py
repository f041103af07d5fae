"""Horton exponents of the parametric side-branching families."""

from hortonlab import TokunagaSequence, differentiated_c_branches, horton_exponent, t_hat

families = [
    TokunagaSequence.explicit([]),           # no side-branching, R = 2
    TokunagaSequence.explicit([1]),          # R = T1 + 2
    TokunagaSequence.geometric(1, 2),        # R = 4
    TokunagaSequence.shallow(1.5, 0.5),
    TokunagaSequence.differentiated(1, 1),
]
for seq in families:
    res = horton_exponent(seq)
    print(f"{seq.family:15s} {str(seq.params):12s} R={res.R:.12f} via {res.method}, t_hat(w0)={t_hat(seq, res.w0):.1e}")

# the differentiated family only fixes c up to two branches; one recovers c
w0 = horton_exponent(TokunagaSequence.differentiated(1, 1)).w0
print(differentiated_c_branches(1.0, w0))
