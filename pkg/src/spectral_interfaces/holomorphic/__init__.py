"""Holomorphic models: Bargmann-Fock spaces, metaplectic kernels and CP^1 partial Bergman kernels."""

from .bargmann_fock import *  # noqa: F401,F403
from .bargmann_fock import __all__ as _bf
from .cp1 import *  # noqa: F401,F403
from .cp1 import __all__ as _cp1
from .metaplectic import *  # noqa: F401,F403
from .metaplectic import __all__ as _mp

__all__ = [*_bf, *_cp1, *_mp]
