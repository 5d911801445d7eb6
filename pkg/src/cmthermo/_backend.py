"""Kernel backend selection.

The compiled ``_core`` extension is used when it imports; otherwise the
NumPy fallback ``_pycore``. Setting ``CMTHERMO_BACKEND=python`` forces the
fallback.
"""
import os

from . import _pycore

core = _pycore
NAME = "python"

if os.environ.get("CMTHERMO_BACKEND", "").lower() != "python":
    try:
        from . import _core as core  # noqa: F811
        NAME = "compiled"
    except ImportError:  # extension not built
        core = _pycore


def get(name: str | None = None):
    """Return the named backend module (``"compiled"`` or ``"python"``)."""
    if name is None:
        return core
    if name == "python":
        return _pycore
    if name == "compiled":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")


def available() -> list[str]:
    names = ["python"]
    try:
        from . import _core  # noqa: F401
        names.append("compiled")
    except ImportError:
        pass
    return names
