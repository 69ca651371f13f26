"""Backend selection for the alignment and string-distance kernels.

The compiled extension is used when it was built and importable; set
``GECMETRICS_PURE_PYTHON=1`` to force the pure-Python versions.
"""

import os

from . import _pykernels

OP_ORIGIN = _pykernels.OP_ORIGIN
OP_MATCH = _pykernels.OP_MATCH
OP_TRANSPOSE = _pykernels.OP_TRANSPOSE
OP_SUBSTITUTE = _pykernels.OP_SUBSTITUTE
OP_DELETE = _pykernels.OP_DELETE
OP_INSERT = _pykernels.OP_INSERT

BACKEND = "python"
_impl = _pykernels
if not os.environ.get("GECMETRICS_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

align_ops = _impl.align_ops
char_distance = _impl.char_distance

python_align_ops = _pykernels.align_ops
python_char_distance = _pykernels.char_distance
