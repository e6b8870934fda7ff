"""Space-time anchored experiments and the collapse schemes that evaluate them."""

from .engine import *  # noqa: F401,F403
from .engine import __all__ as _engine_all
from .experiments import *  # noqa: F401,F403
from .experiments import __all__ as _experiments_all
from .io import ConfigError, load_scenario, parse_scenario, qstate_to_dict, transcript_to_dict

__all__ = list(_engine_all) + list(_experiments_all) + [
    "ConfigError",
    "load_scenario",
    "parse_scenario",
    "qstate_to_dict",
    "transcript_to_dict",
]
