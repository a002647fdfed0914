"""
Logging setup
"""
import logging
import sys
from typing import Optional

from pythonjsonlogger import jsonlogger

from coretune.core.config import settings

PLAIN_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
JSON_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"


def setup_logging(level: Optional[str] = None, json_lines: Optional[bool] = None) -> None:
    """Install a single stderr handler on the root logger"""
    level = (level or settings.LOG_LEVEL).upper()
    json_lines = settings.LOG_JSON if json_lines is None else json_lines

    handler = logging.StreamHandler(sys.stderr)
    if json_lines:
        handler.setFormatter(jsonlogger.JsonFormatter(JSON_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(PLAIN_FORMAT))

    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(level)
