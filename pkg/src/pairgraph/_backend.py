"""Kernel backend selection.

The compiled extension is used when it was built; ``PAIRGRAPH_BACKEND=python``
forces the numpy fallback.
"""

import importlib
import os

BACKENDS = ("cython", "python")


def load(name: str | None = None):
    """Return the kernel module for ``name`` (default: best available)."""
    if name is None:
        name = os.environ.get("PAIRGRAPH_BACKEND", "").lower() or None
    if name == "python":
        return importlib.import_module("pairgraph._kernels_py")
    try:
        return importlib.import_module("pairgraph._kernels")
    except ImportError:
        if name == "cython":
            raise
        return importlib.import_module("pairgraph._kernels_py")


def available() -> list[str]:
    out = ["python"]
    try:
        importlib.import_module("pairgraph._kernels")
        out.insert(0, "cython")
    except ImportError:
        pass
    return out


kernels = load()
BACKEND = "cython" if kernels.__name__.endswith("_kernels") else "python"
