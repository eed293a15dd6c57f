"""Kernel backend selection.

Imports the compiled Cython extension when available, otherwise the
pure-numpy reference implementation. ``MDLSYNTH_PURE=1`` forces the
fallback (useful for benchmarking and debugging). ``BACKEND`` names the
active implementation.
"""

from __future__ import annotations

import os

if os.environ.get("MDLSYNTH_PURE"):
    from . import _ref as _impl

    BACKEND = "python"
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _ref as _impl  # type: ignore[no-redef]

        BACKEND = "python"

GATE_H = _impl.GATE_H
GATE_S = _impl.GATE_S
GATE_T = _impl.GATE_T
GATE_CX = _impl.GATE_CX

apply_gate_left = _impl.apply_gate_left
apply_gate_adjoint_left = _impl.apply_gate_adjoint_left
phase_normalize = _impl.phase_normalize
padded_features = _impl.padded_features
rounded_key = _impl.rounded_key
