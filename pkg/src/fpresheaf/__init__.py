"""Exact computations with presheaves on finite-dimensional F_p-vector spaces."""

__version__ = "0.1.0"

from .site import TruncatedSite, WindowExceeded  # noqa: E402
from .linalg import CapExceeded  # noqa: E402

__all__ = ["TruncatedSite", "WindowExceeded", "CapExceeded", "__version__"]
