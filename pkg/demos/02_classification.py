"""Classify the order p^3 loops and compare theoretical |Aut| with brute force.

Run with ``python demos/02_classification.py``; p = 5 takes a few seconds.
"""

# %%
import time

from autoloop.algebra import make_quadratic_context
from autoloop.extension import aut_group_by_theory, classify_p3, enumerate_admissible_W, theory_iso
from autoloop.loops import find_isomorphisms
from autoloop.qrv import realize_cayley

# %% which W_a, W_b give isomorphic loops? theory says exactly a = +-b
p = 7
ctx = make_quadratic_context(p)
Ws = enumerate_admissible_W(ctx)
grid = [["x" if theory_iso(ctx, Wa, Wb) else "." for Wb in Ws] for Wa in Ws]
print("\n".join(" ".join(row) for row in grid))

# %% classification tables, with the brute-force oracle where it is affordable
for p in (2, 3, 5, 7):
    t0 = time.perf_counter()
    table = classify_p3(p, oracle=p <= 5)
    print(f"p={p}: {table.count} classes in {time.perf_counter() - t0:.1f}s")
    print(table.to_csv())

# %% Aut(W_0) at p = 3 from (A, c) pairs, checked against a search over tables
ctx = make_quadratic_context(3)
W = enumerate_admissible_W(ctx)[0]
theory = aut_group_by_theory(ctx, W)
Q = realize_cayley(W.backend())
print("|S(W)| =", len(theory.S), " |Aut| by theory =", theory.order,
      " by search =", find_isomorphisms(Q, Q, "count"))
