"""Lattices in the 8-dimensional space and the four conditions.

The standard lattice passes.  Then each condition is broken on purpose and
the checker names the one that fails.
"""

from trikit import Lattice, check_all, make_field
from trikit.pipelines import negative_fixtures

F = make_field(7)
N = 24

std = Lattice.standard(F, N)
rep = check_all(std)  # no witness given: search residues, then lift
print("standard lattice passes:", rep.passed)
print("searched witness residue:", rep.conditions[3].get("residue"))

for name, L, w, want in negative_fixtures(F, N):
    r = check_all(L, w, N)
    why = r.conditions[r.failed].get("reason", "") if r.failed else ""
    print(f"{name:26s} expected ({want}) got ({r.failed})  {why}")
