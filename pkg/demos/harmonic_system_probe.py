"""A harmonic Riemannian submersion from Sol would have to solve a small
polynomial system.  Multistart minimisation shows its residual never drops
below 1, while flipping one sign makes the system solvable."""

from solgeom import submersion as sub

res = sub.probe_rch_infeasibility(restarts=1000, seed=42)
print(f"minimum residual {res.min_residual:.12f} at (sigma, a1, a2, a3) = {[round(x, 6) for x in res.argmin]}")

ctrl = sub.probe_rch_infeasibility(restarts=1000, seed=42, control=True)
print(f"control system:  {ctrl.min_residual:.1e} at {[round(x, 6) for x in ctrl.argmin]}")

# the bound is easy to see along sigma = 0, a1 = a2 = 1/sqrt(2), a3 = 0
print("residual there:", sub.rch_residual([0.0, 0.5 ** 0.5, 0.5 ** 0.5, 0.0]))
