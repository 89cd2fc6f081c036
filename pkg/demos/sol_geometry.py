"""Curvature of Sol and of its two hyperbolic quotients."""

import numpy as np

from solgeom import catalog
from solgeom import geometry as geo

sol = catalog.sol()
p = np.array([0.4, -1.0, 0.7])

# %% metric and Christoffel symbols come from jets of the metric entries
print("g at p\n", sol.metric_jet(p, 0).value.round(4))

# %% in the left-invariant frame the curvature is constant
R = geo.frame_curvature(catalog.sol_frame(), p)
for i, j in [(0, 1), (0, 2), (1, 2)]:
    print(f"sectional curvature K(E{i + 1}, E{j + 1}) = {R[i, j, i, j]:+.12f}")
print("Ricci in coordinates\n", geo.ricci(sol, p).round(12))

# %% covariant derivatives D_{E_i} E_j, as rows of coefficients
w = geo.frame_connection(catalog.sol_frame(), p)
for i in range(3):
    for j in range(3):
        if np.any(np.abs(w[i, j]) > 1e-12):
            print(f"D_E{i + 1} E{j + 1} =", w[i, j].round(12))

# %% both bases of the coordinate projections are hyperbolic planes
print("K(hyperbolic_xz) =", geo.gauss_curvature(catalog.hyperbolic_xz(), p[[0, 2]]))
print("K(hyperbolic_yz) =", geo.gauss_curvature(catalog.hyperbolic_yz(), p[[1, 2]]))
