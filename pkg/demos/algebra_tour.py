"""A walk through the twisted composition algebra over F_7((u)).

Prints a few products, the Gram matrix recovered from the table, and runs
the identity check on a small sample.
"""

from trikit import AlgebraElement, derive_gram, make_field, twisted_mul, validate_axioms
from trikit.series import LaurentJet

F = make_field(7)
print("field", F.to_json(), "with xi =", F.xi)

e = [AlgebraElement.basis(F, i) for i in range(1, 9)]

# a few entries of the untwisted table
for i, j in [(0, 7), (1, 6), (0, 4), (3, 7)]:
    p = e[i].star(e[j])
    nz = [(k + 1, str(c)) for k, c in enumerate(p.coords) if not c.is_zero()]
    print(f"e{i + 1} * e{j + 1} (untwisted) =", nz or "0")

G = derive_gram()
print("Gram matrix, read off the table:")
for row in G:
    print("  ", " ".join(f"{x:2d}" for x in row))

# twisting by a scalar: x * y is semilinear in both slots
u = LaurentJet.monomial(F, 1, 1)
x = AlgebraElement([u if k == 3 else LaurentJet.zero(F) for k in range(8)])
print("q(u e4 + 0) =", x.q(), " (e4 is isotropic)")
print("(u e4) * e8 =", [str(c) for c in twisted_mul(x, e[7])], " (u picks up xi)")

rep = validate_axioms(F, samples=200, seed=1, prec=12)
print(f"{rep.checks} identity checks on 200 samples:", "all hold" if rep.passed else rep.failure)
