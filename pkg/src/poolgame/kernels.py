"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` module. Set ``POOLGAME_PURE_PYTHON=1`` to force the
fallback. ``BACKEND`` names the active one.
"""
import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("POOLGAME_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend or python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

replicator_rhs = _active.replicator_rhs
rk4_integrate = _active.rk4_integrate
apply_switches = _active.apply_switches
