"""Relative residuals of the x² and x³ change-of-variable identities over an H × ξ panel."""
import argparse

from rosenblatt.cli import xi_panel
from rosenblatt.spectral import nystrom_eig
from rosenblatt.stransform import ito_residual_poly

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--H", default="0.6,0.75,0.9")
ap.add_argument("--a", type=float, default=0.5)
ap.add_argument("--b", type=float, default=1.0)
ap.add_argument("--degrees", default="2,3")
args = ap.parse_args()

print(f"{'H':>5} {'xi':>7} {'deg':>3} {'relative':>10}  routes")
for H in map(float, args.H.split(",")):
    spec = nystrom_eig(H)
    for name, xi in xi_panel("default"):
        for deg in map(int, args.degrees.split(",")):
            R = ito_residual_poly(deg, args.a, args.b, xi, H, spec=spec)
            print(f"{H:5.2f} {name:>7} {deg:3d} {R.relative:10.2e}  {','.join(R.routes)}")
