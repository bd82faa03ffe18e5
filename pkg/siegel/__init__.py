# Siegel Package
__version__ = "0.1"

from .siegel_manager import SiegelManager

__all__ = ['SiegelManager', '__version__']
