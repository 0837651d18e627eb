"""
Marginal grids
==============

With many dimensions the joint distance correlation gets diluted by the
noise coordinates.  Looking at every (X column, Y column) pair separately
and taking the maximum keeps a single strong pair visible.
"""

import numpy as np

from maxmarginal import marginal_grid, max_marginal, unbiased_dcor

rng = np.random.default_rng(1)
n, p, q = 100, 200, 3
x = rng.uniform(-1, 1, size=(n, p))
y = rng.uniform(-1, 1, size=(n, q))
y[:, 1] = np.abs(x[:, 41]) ** 0.25  # one dependent pair, hidden among 600

grid = marginal_grid(x, y)
agg = max_marginal(grid)
print("grid shape       ", grid.values.shape)
print("max cell         %.4f at %s (1-based)" % (agg.max_value, agg.argmax))
print("average cell     %.4f" % agg.avg_value)
print("joint dcor       %.4f" % unbiased_dcor(x, y).dcor)

# The five largest cells: the planted pair stands well clear of the noise
flat = np.argsort(grid.values, axis=None)[::-1][:5]
for i, j in zip(*np.unravel_index(flat, grid.values.shape)):
    print(f"  X{i + 1:<4} Y{j + 1}  {grid.values[i, j]:+.4f}")

# A constant column is an error by default, or skipped on request
x[:, 7] = 0.5
try:
    marginal_grid(x, y)
except ValueError as exc:
    print("strict mode:     ", exc)
lenient = marginal_grid(x, y, permissive=True)
print("permissive mode:  %d cells excluded" % (~lenient.valid).sum())
