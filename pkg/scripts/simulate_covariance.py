"""Empirical covariance and skewness of simulated paths against their exact values."""
import argparse

import numpy as np

from rosenblatt.chaos import simulate_paths
from rosenblatt.moments import kappa_r
from rosenblatt.numcore import SeedSpec

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--H", type=float, default=0.75)
ap.add_argument("--paths", type=int, default=10_000)
ap.add_argument("--seed", type=int, default=20240601)
ap.add_argument("--stream", type=int, default=21)
args = ap.parse_args()

times = np.array([0.2, 0.4, 0.6, 0.8, 1.0])
S = simulate_paths(times, args.H, args.paths, SeedSpec(args.seed, args.stream)).samples
emp = S.T @ S / S.shape[0]
T, U = np.meshgrid(times, times, indexing="ij")
ref = 0.5 * (T ** (2 * args.H) + U ** (2 * args.H) - np.abs(T - U) ** (2 * args.H))
np.set_printoptions(precision=4, suppress=True)
print("relative covariance error:\n", emp / ref - 1)
x = S[:, -1] - S[:, -1].mean()
print(f"skewness at t=1: {np.mean(x ** 3) / np.mean(x ** 2) ** 1.5:.4f}  (exact {kappa_r(args.H, 3):.4f})")
