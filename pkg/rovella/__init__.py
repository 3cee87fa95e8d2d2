__version__ = "0.1.0"

from .config import ROVELLA_PARAMS, ROVELLA_DEFAULT, RunConfig, load_config
from .errors import RovellaError
from .core import *
