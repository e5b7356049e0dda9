"""Divergence conventions and the mass/shape split of a nonnegative matrix.

The generalized Kullback-Leibler divergence D(p||q) = p*log(p/q) - p + q is
the fitting criterion everywhere in this package.  This script walks through
its edge conventions, the elementwise extension to matrices and tensors, the
Hellinger lower bound, and why factoring V is the same problem as factoring
the probability matrix V / sum(V).
"""

import numpy as np

from idivnmf import (
    hellinger_tensor,
    i_div_matrix,
    i_div_scalar,
    i_div_tensor,
    normalize_problem,
)

print("=== scalar conventions ===")
print("D(2, 2)   =", i_div_scalar(2, 2), "   (zero exactly at equality)")
print("D(0, 3)   =", i_div_scalar(0, 3), "   (0*log(0) = 0, so only +q remains)")
print("D(3, 0)   =", i_div_scalar(3, 0), " (mass where the model has none)")
print("D(1, 2)   =", i_div_scalar(1, 2))

print("\n=== matrices and tensors sum elementwise ===")
m = [[0.3, 0.2], [0.1, 0.4]]
n = [[0.2, 0.3], [0.2, 0.3]]
print("D(M, N)   =", i_div_matrix(m, n))
a = np.full((2, 1, 2), 0.25)
b = np.array([0.4, 0.1, 0.1, 0.4]).reshape(2, 1, 2)
print("D(A, B)   =", i_div_tensor(a, b), " (= log(1.25) for this pair)")

print("\n=== Hellinger distance never exceeds the divergence ===")
rng = np.random.default_rng(0)
for _ in range(3):
    x = rng.uniform(0.05, 1.0, size=(2, 2, 2))
    y = rng.uniform(0.05, 1.0, size=(2, 2, 2))
    x, y = x / x.sum(), y / y.sum()
    print(f"H = {hellinger_tensor(x, y):.6f}  <=  D = {i_div_tensor(x, y):.6f}")

print("\n=== normalization splits mass from shape ===")
v = np.array([[3.0, 2.0], [1.0, 4.0]])
scaled = normalize_problem(v)
print("total mass:", scaled.total)
print("probability matrix:\n", scaled.p)
# any factorization problem for v is the same problem for scaled.p: the
# objective decomposes as D(v||wh) = total * D(p||q) + D(total||mass(w))
w = rng.uniform(0.5, 1.5, size=(2, 1))
h = rng.uniform(0.5, 1.5, size=(1, 2))
h /= h.sum(axis=1, keepdims=True)
lhs = i_div_matrix(v, w @ h)
rhs = scaled.total * i_div_matrix(scaled.p, (w / w.sum()) @ h) + i_div_scalar(
    scaled.total, w.sum()
)
print(f"decomposition check: {lhs:.12f} = {rhs:.12f}")
