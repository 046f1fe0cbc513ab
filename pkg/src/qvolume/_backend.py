"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure-numpy kernels.
Set QVOLUME_BACKEND=python to force the fallback (e.g. for benchmarks).
"""

import os

if os.environ.get("QVOLUME_BACKEND", "").lower() == "python":
    from . import _pykernels as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _pykernels as kernels  # type: ignore[no-redef]

BACKEND = kernels.BACKEND_NAME

run_chain = kernels.run_chain
muller_phase = kernels.muller_phase
psd_bits = kernels.psd_bits
