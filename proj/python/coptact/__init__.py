"""Center-of-pressure tactile contact toolkit: python bindings."""

try:
    from ._coptact import *  # noqa: F401,F403
    from . import _coptact as _core
except ImportError:  # module built in-tree (ctest) rather than installed
    from _coptact import *  # noqa: F401,F403
    import _coptact as _core

__all__ = [name for name in dir(_core) if not name.startswith("_")]
__version__ = "0.1.0"
