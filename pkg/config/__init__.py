"""
Configuration Package
Runtime settings from the environment and simulation settings from config files
"""

from .settings import Config, SimConfig, configure_logging, load_config, parse_config, render_config, PRESETS

__all__ = [
    'Config',
    'SimConfig',
    'configure_logging',
    'load_config',
    'parse_config',
    'render_config',
    'PRESETS',
]
