"""Zero-shot temporal relation extraction harness."""

try:
    from ._trex import *  # noqa: F401,F403  (installed package layout)
    from ._trex import __doc__  # noqa: F401
except ImportError:  # in-tree builds put the module beside the package
    from _trex import *  # noqa: F401,F403
    from _trex import __doc__  # noqa: F401

__version__ = "0.1.0"
