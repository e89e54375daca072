from .version import __version__  # noqa: F401
from .main import main, run  # noqa: F401
