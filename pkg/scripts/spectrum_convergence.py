"""Leading eigenvalues and Σλ² as the Galerkin grid is refined."""
import argparse

from rosenblatt.spectral import nystrom_eig, power_sum

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--H", type=float, default=0.75)
ap.add_argument("--cells", default="250,500,1000,2000")
args = ap.parse_args()

print(f"{'cells':>6} {'trusted':>7} {'lambda_1':>14} {'lambda_2':>14} {'sum lambda^2 - 1/2':>20}")
for n in map(int, args.cells.split(",")):
    spec = nystrom_eig(args.H, n, max(20, n // 20))
    print(f"{n:6d} {spec.n_trust:7d} {spec.lambdas[0]:14.10f} {spec.lambdas[1]:14.10f} "
          f"{power_sum(spec, 2).value - 0.5:20.3e}")
