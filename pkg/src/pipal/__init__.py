"""Parallel in-place algorithms toolkit.

Inversion-encoded auxiliary state over distinct 64-bit keys, and the
algorithms built on it: in-place parallel merge, in-place parallel random
shuffle, and a minimum-spanning-forest / connectivity oracle stored inside
a CSR graph's offset array.  Hot kernels run in a compiled extension when
available, with a pure-Python fallback selected at import.
"""

from .config import set_verify, verify_enabled

__version__ = "0.1.0"

__all__ = ["set_verify", "verify_enabled", "__version__"]
