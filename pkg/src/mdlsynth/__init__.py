"""Clifford+T unitary synthesis via a learned gate-count heuristic and
stochastic beam search.

The hot kernels (gate application, phase normalization, feature building)
live in :mod:`mdlsynth._kernels` with a compiled Cython backend and a
pure-numpy fallback selected at import; ``mdlsynth._kernels.BACKEND`` names
the active one.
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
