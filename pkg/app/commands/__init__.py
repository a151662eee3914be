from .emi import run as emi_command
from .outage import run as outage_command
from .optimize import run as optimize_command
from .dmt import run as dmt_command
from .size import run as size_command
from .mc_validate import run as mc_validate_command

COMMANDS = {
    "emi": emi_command,
    "outage": outage_command,
    "optimize": optimize_command,
    "dmt": dmt_command,
    "size": size_command,
    "mc-validate": mc_validate_command,
}

__all__ = [
    "COMMANDS",
    "emi_command",
    "outage_command",
    "optimize_command",
    "dmt_command",
    "size_command",
    "mc_validate_command",
]
