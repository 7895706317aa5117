"""meshlite: a type-driven parallel array language on a simulated PGAS runtime."""

from .checker import check_program
from .errors import MeshError
from .interp import run
from .lexer import tokenize
from .parser import parse

__version__ = "0.1.0"

__all__ = ["tokenize", "parse", "check_program", "run", "MeshError", "__version__"]
