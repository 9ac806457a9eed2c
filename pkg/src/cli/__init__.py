"""
Command-line interface: configs, command dispatch and result files.
"""
from .commands import COMMANDS, CommandResult, RunContext, parse_vector, run
from .models import Command, Config, OutputPaths, config_from_dict, load_config
from .output import (
    read_certificate_csv,
    read_trajectory_csv,
    render_plot_script,
    to_json,
    trajectory_columns,
    write_certificate_csv,
    write_trajectory_csv,
)

__all__ = [
    "COMMANDS",
    "Command",
    "CommandResult",
    "Config",
    "OutputPaths",
    "RunContext",
    "config_from_dict",
    "load_config",
    "parse_vector",
    "read_certificate_csv",
    "read_trajectory_csv",
    "render_plot_script",
    "run",
    "to_json",
    "trajectory_columns",
    "write_certificate_csv",
    "write_trajectory_csv",
]
