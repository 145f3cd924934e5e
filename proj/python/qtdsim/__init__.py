"""Density-operator quantum thermodynamics bindings."""

try:
    from ._qtdsim import *  # noqa: F401,F403  (installed wheel layout)
    from ._qtdsim import scenario  # noqa: F401
except ImportError:  # in-tree build: the module sits next to the package
    from _qtdsim import *  # noqa: F401,F403
    from _qtdsim import scenario  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
