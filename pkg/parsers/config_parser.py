"""
Flat key=value experiment configuration files
"""
import os
from typing import Dict, List

from dotenv import dotenv_values

from utils.errors import InvalidParameter


def read_config_file(file_path: str) -> Dict[str, str]:
    """
    Read a dotenv-style config file

    Keys are normalized to argparse destinations: lower case, dashes become
    underscores (`n-grid=1000,2000` -> {'n_grid': '1000,2000'}).
    """
    if not os.path.exists(file_path):
        raise InvalidParameter(f"Config file not found: {file_path}")
    values = dotenv_values(file_path)
    config = {}
    for key, value in values.items():
        if value is None:
            raise InvalidParameter(f"config key '{key}' has no value")
        config[key.strip().lower().replace('-', '_')] = value.strip()
    return config


def parse_number_list(text: str, kind=float) -> List:
    """'1000,2000' -> [1000, 2000]"""
    if isinstance(text, (list, tuple)):
        return [kind(v) for v in text]
    items = [item.strip() for item in str(text).split(',') if item.strip()]
    if not items:
        raise InvalidParameter("grid must not be empty")
    try:
        return [kind(float(item)) if kind is int else kind(item) for item in items]
    except ValueError as exc:
        raise InvalidParameter(f"invalid number list '{text}'") from exc
