"""Kernel backend selection.

The compiled extension ``_ext`` is used when importable; otherwise the
numpy implementation in ``_pure`` takes over.  ``CHIRAL_RABI_KERNELS=python``
forces the fallback (useful for testing both paths).
"""
import os

from . import _pure

try:
    from . import _ext
except ImportError:  # extension not built
    _ext = None


def load_backend(name):
    """Return the kernel module called ``name`` ("cython" or "python")."""
    if name == "python":
        return _pure
    if name == "cython":
        if _ext is None:
            raise ImportError("compiled kernels are not built")
        return _ext
    raise ValueError(f"unknown kernel backend {name!r}")


if os.environ.get("CHIRAL_RABI_KERNELS", "").lower() == "python" or _ext is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

_impl = load_backend(BACKEND)
jacobi_hermitian = _impl.jacobi_hermitian
cf_spectral = _impl.cf_spectral

__all__ = ["BACKEND", "load_backend", "jacobi_hermitian", "cf_spectral"]
