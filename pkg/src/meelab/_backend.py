"""Select the compiled kernels or the numpy fallback once, at import time.

Set ``MEELAB_BACKEND=python`` to force the fallback, ``compiled`` to require
the extension, or leave it unset (``auto``) to prefer the extension.
"""
import logging
import os

from . import _fallback

logger = logging.getLogger(__name__)

_requested = os.environ.get("MEELAB_BACKEND", "auto").lower()
if _requested not in ("auto", "python", "compiled"):
    raise ImportError(f"MEELAB_BACKEND must be auto, python or compiled, got {_requested!r}")

if _requested == "python":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        logger.debug("compiled kernels unavailable, using numpy fallback")
        _impl = _fallback
        BACKEND = "python"

pairwise_sq_dists = _impl.pairwise_sq_dists
gram_matrix = _impl.gram_matrix
matrix_mee = _impl.matrix_mee

__all__ = ["BACKEND", "pairwise_sq_dists", "gram_matrix", "matrix_mee"]
