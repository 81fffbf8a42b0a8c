"""Lifting a proper isometry to a related triple.

t^2 on the hyperbolic pair lifts; t^1 does not, since its spinor norm is
not a square.  The lift is only defined up to the F-scalars listed in info.
"""

from trikit import JetMatrix, check_triple, make_field, triality_lift
from trikit.errors import MathFailure
from trikit.series import LaurentJet

F = make_field(7)
one = LaurentJet.one(F)


def hyperbolic(m):
    t = LaurentJet.monomial(F, 1, 3 * m)
    return JetMatrix.diag(F, [t] + [one] * 6 + [LaurentJet.monomial(F, 1, -3 * m)])


g1 = hyperbolic(2)
res = triality_lift(g1)
print("lift info:", res.info)
for s in (1, -1):
    print(f"sign {s:+d}: related triple holds:", check_triple(g1, *res.pair(s), N=24))

try:
    triality_lift(hyperbolic(1))
except MathFailure as exc:
    print("t^1:", exc.args[0], "-", exc.info["reason"])
