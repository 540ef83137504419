"""prodnls: pseudospectral laboratory for the cubic Schrodinger equation on
box-times-torus product domains.

Subpackage map: grid (lattice and transforms), sobolev (anisotropic norms and
random data), propagate (exact linear flows and per-mode reductions),
spacetime (mixed norms and admissibility), evolve (split-step and
integral-equation solvers), scatter (asymptotic diagnostics), scans
(inequality ratio scans), io (file formats), cli (batch commands).
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"
__all__ = ["kernel_backend", "__version__"]
