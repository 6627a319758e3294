# ruff: noqa: F403

from .base import *
from .corpus import *
from .embed import *
from .equivalence import *
from .evaluate import *
from .flow import *
from .lmc import *
from .parser import *
from .testing import *
