"""Toolkit for hyperbolic systems u_xt = F(u, ux, v, vx), v_xt = G(u, ux, v, vx)
whose generic solutions induce planar metrics of constant Gaussian curvature
-1 (pseudospherical) or +1 (spherical).

Submodules:
  expr      symbolic core (parse, diff, evaluate, randomized identity test)
  frames    systems, frames, metric, and the six-condition verifier
  classify  constructive classification builders and the functional-equation
            trichotomy
  catalog   executable registry of the known systems and family reductions
  linear    2x2 / 3x3 linear problems, zero curvature, numeric transport
  goursat   characteristic-data solver plus geometric validation (curvature)
  cli       command line front end
"""

__version__ = "0.1.0"

__all__ = [
    "expr",
    "frames",
    "classify",
    "catalog",
    "linear",
    "goursat",
]
