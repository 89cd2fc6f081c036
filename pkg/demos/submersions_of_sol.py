"""The projections of Sol onto hyperbolic planes: submersions, but neither
harmonic nor biharmonic.  A cubic map into the plane is biharmonic."""

import numpy as np

from solgeom import catalog
from solgeom import mapcalc as mc
from solgeom import submersion as sub
from solgeom.sampling import random_points

points = random_points(5, 1, 3)

# %% certify the submersions and find their fibres
for name in ("pi1", "pi2"):
    rep = mc.is_riemannian_submersion(catalog.get(name), reference=catalog.sol_frame())
    print(f"{name}: submersion={rep.passed} worst={rep.worst_residual:.1e} vertical={np.round(np.array(rep.vertical[0]), 12) + 0.0}")

# %% tension has norm 1 and bitension norm 2 everywhere
for name in ("pi1", "pi2"):
    tau, tau2 = zip(*(mc.tension_and_bitension(catalog.get(name), p) for p in points))
    print(f"{name}: |tau| = {[round(t.norm, 12) for t in tau]}  |tau2| = {[round(t.norm, 9) for t in tau2]}")

# %% the same facts from an adapted frame: fibres have mean curvature k1
for frame in ("case1", "case2"):
    d = sub.integrability_data(catalog.get(frame), points[0])
    print(frame, {k: round(v, 12) + 0.0 for k, v in d.values().items()},
          "residual", sub.biharmonic_residual(d).round(12))

# %% a proper biharmonic map: bitension vanishes, tension does not
phi = catalog.biharmonic_example(1.0, -0.5, 0.3, 2.0)
for p in points[:3]:
    tau, tau2 = mc.tension_and_bitension(phi, p)
    print(f"at {np.round(p, 3)}: |tau| = {tau.norm:.4f}  |tau2| = {tau2.norm:.1e}")
