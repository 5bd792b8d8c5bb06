"""POMDP learning toolkit: natural actor-critic with finite-state controllers."""

try:
    from ._pomdp_nac import *  # noqa: F401,F403  (installed package layout)
    from . import _pomdp_nac as _core
except ImportError:  # in-tree test layout: extension on PYTHONPATH
    from _pomdp_nac import *  # noqa: F401,F403
    import _pomdp_nac as _core

__version__ = _core.__version__
