"""
Trial scheduling, seed splitting and the run manifest
"""
import json
import logging
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Sequence

import numpy as np
import pandas as pd
import scipy

from config import MANIFEST_NAME
from utils.rng import RngStream

logger = logging.getLogger(__name__)


def stream_for(seed, *keys: int) -> RngStream:
    """Child stream of the root seed along a path of spawn keys"""
    stream = RngStream(seed)
    for key in keys:
        stream = stream.spawn(key)
    return stream


def run_tasks(func: Callable, tasks: Sequence, workers: int = 1,
              progress_callback: Callable[[str], None] = None) -> List:
    """
    Apply func to every task, in a process pool when workers > 1

    Results come back in task order whatever the scheduling, so merged
    output does not depend on the worker count.
    """
    total = len(tasks)
    results = []
    if workers <= 1 or total <= 1:
        for i, task in enumerate(tasks):
            results.append(func(task))
            _report(progress_callback, i + 1, total)
        return results

    with ProcessPoolExecutor(max_workers=workers) as executor:
        for i, result in enumerate(executor.map(func, tasks)):
            results.append(result)
            _report(progress_callback, i + 1, total)
    return results


def _report(progress_callback, done: int, total: int):
    if progress_callback is None:
        return
    step = max(1, total // 10)
    if done == total:
        progress_callback(f"✅ {done}/{total} tasks done")
    elif done % step == 0:
        progress_callback(f"⏳ {done}/{total} tasks")


def library_versions() -> Dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def write_manifest(output_dir: str, subcommand: str, config: Dict, seed) -> str:
    """Write the JSON-lines manifest of one run"""
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, MANIFEST_NAME)
    record = {
        "subcommand": subcommand,
        "seed": seed,
        "config": {key: _jsonable(value) for key, value in sorted(config.items())},
        "versions": library_versions(),
    }
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(record, sort_keys=True) + "\n")
    return path


def _jsonable(value):
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)
