"""
Testing independence
====================

Three statistics (max of the grid, average of the grid, joint distance
correlation) and two ways of calibrating them: a closed-form chi-square
approximation and a seeded permutation test.
"""

import numpy as np

from maxmarginal import gen_fixed_dep, run_test

n, p = 100, 50
for relationship in ("independent", "linear", "quadratic", "fourth_root"):
    x, y = gen_fixed_dep(relationship, n, p, seed=3)
    print(relationship)
    for method in ("max", "avg", "full"):
        chi = run_test(x, y, method, "chisquare")
        print(f"  {method:4}  stat {chi.statistic:+.4f}  chi-square p = {chi.p_value:.3g}")
    perm = run_test(x, y, "max", "permutation", r=999, seed=0)
    print(f"  max   permutation p = {perm.p_value:.3g} (r = {perm.permutations_used})")

# Same seed, same p-value, whatever the thread count
x, y = gen_fixed_dep("quadratic", n, p, seed=4)
a = run_test(x, y, "max", "permutation", r=500, seed=11, threads=1)
b = run_test(x, y, "max", "permutation", r=500, seed=11, threads=4)
print("reproducible:", a == b)
