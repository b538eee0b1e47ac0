"""
Long-format result tables

A result file starts with one comment line
    # dpols-results schema=1 experiment=<id>
followed by a CSV header and one row per (trial, point), sorted by that key.
"""
import os
import re
from typing import Dict, Iterable, List

import pandas as pd

from config import RESULTS_SCHEMA
from utils.errors import DatasetParseError

SORT_KEYS = ("trial", "point")

_HEADER = re.compile(r"^# dpols-results schema=(\d+) experiment=(\S+)\s*$")


class ResultTable:
    """Rows of one experiment, written and re-read in the harness format"""

    def __init__(self, experiment: str, frame: pd.DataFrame):
        self.experiment = experiment
        keys = [key for key in SORT_KEYS if key in frame.columns]
        if keys:
            frame = frame.sort_values(keys, kind="mergesort").reset_index(drop=True)
        self.frame = frame

    @classmethod
    def from_records(cls, experiment: str, records: Iterable[Dict], columns: List[str] = None) -> "ResultTable":
        return cls(experiment, pd.DataFrame.from_records(list(records), columns=columns))

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def columns(self) -> List[str]:
        return list(self.frame.columns)

    def write(self, output_path: str) -> str:
        """Write the table; the file is replaced, never appended to"""
        folder = os.path.dirname(output_path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(output_path, "w", newline="", encoding="utf-8") as handle:
            handle.write(f"# dpols-results schema={RESULTS_SCHEMA} experiment={self.experiment}\n")
            self.frame.to_csv(handle, index=False, lineterminator="\n")
        return output_path

    @classmethod
    def read(cls, file_path: str) -> "ResultTable":
        with open(file_path, encoding="utf-8") as handle:
            first = handle.readline()
        match = _HEADER.match(first)
        if not match:
            raise DatasetParseError("missing dpols-results header", line=1)
        schema = int(match.group(1))
        if schema != RESULTS_SCHEMA:
            raise DatasetParseError(f"unsupported result schema {schema}", line=1)
        frame = pd.read_csv(file_path, skiprows=1)
        return cls(match.group(2), frame)
