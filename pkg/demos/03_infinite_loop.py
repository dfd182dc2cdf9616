"""The infinite loop on F_p t x F_p(t): arithmetic, identities, and a bounded closure.

Run with ``python demos/03_infinite_loop.py``. Depth 6 keeps it under a few
seconds; the CLI runs depth 8 by default.
"""

# %%
from autoloop.algebra import RatFun
from autoloop.infinite import bfs_closure, make_laurent_loop, membership_U, verify_infinite_identities

# %% elements are (i t, u) with u a reduced rational function
L = make_laurent_loop(3)
tt, e = L.elem(1, 0), L.elem(0, 1)
print(L.mul(tt, e), L.mul(e, tt))
print("((t,0)(t,0))(0,1) =", L.mul(L.mul(tt, tt), e))
print("(t,0)((t,0)(0,1)) =", L.mul(tt, L.mul(tt, e)))

# %% which denominators can appear
for den in [(1, 1), (0, 1), (1, 1, 1), (1, 0, 1)]:
    f = RatFun(3, (1,), den)
    print(f, "in U:", membership_U(3, f).in_U)

# %% identity checks for a few primes
for p in (2, 3, 5):
    rep = verify_infinite_identities(p)
    print(f"p={p}: {len(rep.checks)} checks, all ok = {rep.all_ok}")

# %% grow the subloop generated by (t,0) and (0,1)
rep = bfs_closure(3, depth=6)
print("level sizes", rep.level_sizes)
print("targets reached at derivation size:", {str(k): v for k, v in rep.reached.items()})
print("membership violations:", len(rep.violations))
