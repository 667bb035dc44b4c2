"""Forward-kernel selection: compiled extension if built, numpy otherwise.

``HAVE_COMPILED`` records which implementation is active. Both expose
``forward_loglik`` and ``leave_one_out_loglik`` with identical contracts
and agree to floating-point noise; the benchmark under ``benchmarks/``
compares their speed.
"""
from . import _pykernels

try:
    from . import _copying as _impl

    HAVE_COMPILED = True
except ImportError:
    _impl = _pykernels
    HAVE_COMPILED = False

forward_loglik = _impl.forward_loglik
leave_one_out_loglik = _impl.leave_one_out_loglik

forward_loglik_py = _pykernels.forward_loglik
leave_one_out_loglik_py = _pykernels.leave_one_out_loglik
