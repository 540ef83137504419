"""Backend selection for the pointwise hot kernels.

The compiled extension (``_accel``, built from Cython) is preferred when it
imports; otherwise the numpy fallback is used. ``PRODNLS_KERNELS=python`` or
``PRODNLS_KERNELS=c`` forces a backend (the latter raises if the extension is
missing, so benchmarks cannot silently compare python against python).
"""

import os

from . import _fallback

_choice = os.environ.get("PRODNLS_KERNELS", "auto").lower()

if _choice == "python":
    _impl = _fallback
elif _choice == "c":
    from . import _accel as _impl
else:
    try:
        from . import _accel as _impl
    except ImportError:
        _impl = _fallback

BACKEND = _impl.BACKEND
abs2 = _impl.abs2
apply_phase = _impl.apply_phase
apply_phase_inplace = _impl.apply_phase_inplace
rotate_by_intensity = _impl.rotate_by_intensity
rotate_by_intensity_inplace = _impl.rotate_by_intensity_inplace
