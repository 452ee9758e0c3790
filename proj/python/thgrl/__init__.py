"""Traceable heterogeneous graph representation learning."""

try:
    from ._thgrl import *  # noqa: F401,F403  installed wheel layout
    from . import _thgrl as _ext
except ImportError:  # build-tree layout: extension sits next to the package
    from _thgrl import *  # noqa: F401,F403
    import _thgrl as _ext

__version__ = "0.1.0"
__all__ = [name for name in dir(_ext) if not name.startswith("_")]
