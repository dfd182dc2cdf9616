"""Build a few order-27 loops, look at their tables, and poke at the structure.

Run with ``python demos/01_finite_loops.py``.
"""

# %%
from autoloop.algebra import Matrix, make_quadratic_context
from autoloop.extension import enumerate_admissible_W, matrix_plane
from autoloop.loops import associator_subloop, is_automorphic, is_group, loop_invariants
from autoloop.qrv import LoopElement, matrix_backend, qrv_associator, qrv_mul, realize_cayley

# %% F_9 = F_3(r) with r^2 = 2, and the three lines W_a not meeting F_3
ctx = make_quadratic_context(3)
Ws = enumerate_admissible_W(ctx)
print("field modulus coefficients:", ctx.modulus)
for W in Ws:
    print(W.label(), "=", sorted(str(x) for x in W.elements()))

# %% multiply two elements straight from the formula
B = Ws[0].backend()
r, one = ctx.gen, ctx.one
x, y = LoopElement(r, one), LoopElement(r, r)
print("x*y =", qrv_mul(B, x, y))
print("[x, y, y] =", qrv_associator(B, x, LoopElement(r, ctx.zero), LoopElement(r, ctx.zero)))

# %% the realized Cayley table is a plain int array
Q = realize_cayley(B)
print("table shape", Q.table.shape, "dtype", Q.table.dtype)
print("first row equals arange:", (Q.table[Q.identity] == range(Q.order)).all())

# %% automorphic, but not associative; the associators fill 0 x K
print("automorphic:", is_automorphic(Q, kinds=("T", "L", "R")).ok)
print("group:", is_group(Q))
print("|Asc| =", len(associator_subloop(Q)))
print(loop_invariants(Q).as_dict())

# %% a square-zero matrix gives a group instead
N = realize_cayley(matrix_backend(3, [Matrix([[0, 1], [0, 0]], 3)]))
print("nilpotent backend is a group:", is_group(N))

# %% a 2 x 2 matrix whose span with I is anisotropic lands back in the extension family
plane = matrix_plane(3, Matrix([[0, 1], [2, 0]], 3))
print("theta =", plane.theta, "target", plane.target.label())
print("bridge (first ten):", plane.bridge[:10].tolist())
