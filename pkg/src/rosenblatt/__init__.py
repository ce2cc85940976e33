"""Numerics for the Rosenblatt process: kernels, spectra, cumulants, characteristic
functions, S-transform calculus and a discrete Wiener-chaos oracle."""
import os

# the only environment knob: cap BLAS threads before numpy loads
_threads = os.environ.get("ROSENBLATT_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from .numcore import DomainError, SeedSpec  # noqa: E402
from .kernels import Hurst, make_hurst  # noqa: E402

__version__ = "0.1.0"

__all__ = ["DomainError", "SeedSpec", "Hurst", "make_hurst", "__version__"]
