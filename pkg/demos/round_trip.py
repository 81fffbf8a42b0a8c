"""Random group element -> lattice -> normalize -> back again.

Also shows that raising the precision changes nothing already certified.
"""

import sys
import time

from trikit import make_field
from trikit.pipelines import roundtrip

F = make_field(7)
words = int(sys.argv[1]) if len(sys.argv) > 1 else 10

runs = {}
for N in (24, 32):
    t0 = time.perf_counter()
    out, objs = roundtrip(F, words, length=6, pole_bound=2, seed=3, N=N, searches=2)
    runs[N] = objs
    print(f"prec {N}: {out['succeeded']}/{words} round trips in {time.perf_counter() - t0:.1f}s")

rec = out["records"][0]
print("word 0:", rec["word"])
print("stages:")
for s in rec["backward"]["stages"]:
    print("   ", s)

agree = all(a[1].agrees(b[1]) for a, b in zip(runs[24], runs[32]))
print("normalizing elements agree to common precision:", agree)
