from . import adapters
from . import bounds
from . import measurement
from . import signals
from . import utils
from . import witness

from importlib import metadata

try:
    __version__ = metadata.version(__package__.replace('.', '-') or __name__.replace('.', '-'))
except metadata.PackageNotFoundError:
    # Running from a source checkout that was not pip installed
    __version__ = '0.0.0'
