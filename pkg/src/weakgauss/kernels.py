"""Selects the trial kernel at import time.

The compiled ``_ckernel`` is used when it was built; otherwise the numpy
implementation in ``_pykernel`` is. Set ``WEAKGAUSS_BACKEND=python`` to
force the fallback.
"""

import os

from weakgauss import _pykernel

python_simulate_block = _pykernel.simulate_block

try:
    from weakgauss import _ckernel
except ImportError:  # extension not built
    _ckernel = None

compiled_simulate_block = None if _ckernel is None else _ckernel.simulate_block

if _ckernel is not None and os.environ.get("WEAKGAUSS_BACKEND", "").lower() != "python":
    simulate_block = _ckernel.simulate_block
    BACKEND = _ckernel.BACKEND
else:
    simulate_block = _pykernel.simulate_block
    BACKEND = _pykernel.BACKEND


def get_kernel(name=None):
    """Return ``(backend_name, simulate_block)`` for ``name`` or the default."""
    if name is None:
        return BACKEND, simulate_block
    if name == "python":
        return _pykernel.BACKEND, _pykernel.simulate_block
    if name == "cython":
        if _ckernel is None:
            raise ImportError("compiled kernel is not available; build with `pip install -e .`")
        return _ckernel.BACKEND, _ckernel.simulate_block
    raise ValueError(f"unknown backend {name!r}")
