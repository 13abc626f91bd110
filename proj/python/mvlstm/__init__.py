"""Multi-variable LSTM: forecasting with per-variable attention and Granger analysis."""

try:
    from ._mvlstm import *  # noqa: F401,F403  (installed package layout)
    from ._mvlstm import __doc__ as _core_doc  # noqa: F401
except ImportError:  # in-tree build: extension sits on sys.path directly
    from _mvlstm import *  # noqa: F401,F403
