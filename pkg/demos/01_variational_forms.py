#!/usr/bin/env python3
"""Walkthrough: the column-decoupled variational forms of sum_i sigma_i^p.

Evaluating sum_i sigma_i(X)^p needs an SVD of X. The two factorized forms

    product form:  sum_i (|u_i| |v_i|)^p
    sum form:      sum_i ((|u_i|^2 + |v_i|^2)/2)^p

need only column norms of any factorization X = U V^T, upper-bound the
spectral value for every factorization, and attain it at the balanced one
built from the SVD. This script shows the chain of inequalities and the
attainment numerically.
"""

import numpy as np

from spfact import (
    Factors,
    balanced_factorization,
    schatten_p_power,
    variational_product,
    variational_sum,
)

rng = np.random.default_rng(0)

# a 12x10 matrix of exact rank 4
X = rng.standard_normal((12, 4)) @ rng.standard_normal((4, 10))

print("spectral value vs the two factorized forms")
print(f"{'p':>5} {'spectral':>10} {'product':>10} {'sum':>10}   (random width-6 factors)")
F_rand = Factors(rng.standard_normal((12, 6)), rng.standard_normal((10, 6)))
for p in (0.3, 0.5, 0.8, 1.0):
    sc = schatten_p_power(X, p)
    pr = variational_product(F_rand, p)
    sm = variational_sum(F_rand, p)
    print(f"{p:>5} {sc:>10.4f} {pr:>10.4f} {sm:>10.4f}")
print("note: random factors do not represent X; the forms still upper-bound")
print("the spectral value of the matrix THEY represent:")
Xr = F_rand.matrix()
for p in (0.3, 0.5, 1.0):
    print(
        f"  p={p}: {schatten_p_power(Xr, p):.4f}"
        f" <= {variational_product(F_rand, p):.4f}"
        f" <= {variational_sum(F_rand, p):.4f}"
    )

print()
print("balanced factorization attains the spectral value exactly")
Fb = balanced_factorization(X, 6)  # width 6 > rank 4: padded with zero columns
for p in (0.3, 0.5, 0.8, 1.0):
    sc = schatten_p_power(X, p)
    sm = variational_sum(Fb, p)
    print(f"  p={p}: spectral {sc:.10f}  sum form {sm:.10f}  gap {sm - sc:.2e}")

print()
print("the product form is invariant to per-column rescaling (c u_i, v_i / c),")
print("the sum form is not; both agree at the balanced point:")
F_unbal = Factors(Fb.U * 3.0, Fb.V / 3.0)
for p in (0.5,):
    print(f"  balanced:   product {variational_product(Fb, p):.6f}  sum {variational_sum(Fb, p):.6f}")
    print(f"  unbalanced: product {variational_product(F_unbal, p):.6f}  sum {variational_sum(F_unbal, p):.6f}")

print()
print("at p = 1 the sum form is the familiar half sum of squared norms,")
print("and the attained value is the nuclear norm:")
nuc = np.sum(np.linalg.svd(X, compute_uv=False))
print(f"  nuclear norm {nuc:.6f}  attained sum form {variational_sum(balanced_factorization(X, 4), 1.0):.6f}")
