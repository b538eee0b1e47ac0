"""
Dataset CSV reader and writer

Format: UTF-8, header `x1,...,xd,y`, one observation per row, 64-bit floats
written in round-trip form, no index column.
"""
import csv
import math
import os
from typing import List

import numpy as np

from regression.weighted_ols import Dataset
from utils.errors import DatasetParseError


class DatasetParser:
    """Read and write datasets in the harness CSV format"""

    def parse_file(self, file_path: str) -> Dataset:
        """
        Parse a dataset file

        Args:
            file_path: Path to the CSV file

        Returns:
            Dataset with d inferred from the header

        Raises:
            DatasetParseError with the line and column of the first problem
        """
        if not os.path.exists(file_path):
            raise DatasetParseError(f"Dataset file not found: {file_path}")
        with open(file_path, newline='', encoding='utf-8') as handle:
            return self.parse_lines(handle.read().splitlines())

    def parse_lines(self, lines: List[str]) -> Dataset:
        rows = list(csv.reader(lines))
        # Trailing blank lines are tolerated
        while rows and not any(field.strip() for field in rows[-1]):
            rows.pop()
        if not rows:
            raise DatasetParseError("Dataset file is empty", line=1)

        d = self._check_header(rows[0])
        values = np.empty((len(rows) - 1, d + 1))
        for r, row in enumerate(rows[1:]):
            line = r + 2
            if len(row) != d + 1:
                raise DatasetParseError(f"expected {d + 1} fields, found {len(row)}", line=line)
            for c, field in enumerate(row):
                values[r, c] = self._parse_float(field, line, c + 1)

        if values.shape[0] == 0:
            raise DatasetParseError("Dataset has a header but no rows", line=2)
        return Dataset(values[:, :d], values[:, d])

    def write(self, data: Dataset, output_path: str) -> str:
        """Write a dataset; floats use repr so they parse back bit-for-bit"""
        folder = os.path.dirname(output_path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(output_path, 'w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow([f"x{j + 1}" for j in range(data.d)] + ["y"])
            for x_row, y_value in zip(data.x, data.y):
                writer.writerow([repr(float(v)) for v in x_row] + [repr(float(y_value))])
        return output_path

    @staticmethod
    def _check_header(header: List[str]) -> int:
        names = [name.strip() for name in header]
        if len(names) < 2 or names[-1] != "y":
            raise DatasetParseError("header must read x1,...,xd,y", line=1)
        for c, name in enumerate(names[:-1]):
            if name != f"x{c + 1}":
                raise DatasetParseError(f"expected column name x{c + 1}, found '{name}'", line=1, column=c + 1)
        return len(names) - 1

    @staticmethod
    def _parse_float(field: str, line: int, column: int) -> float:
        try:
            value = float(field.strip())
        except ValueError:
            raise DatasetParseError(f"'{field}' is not a number", line=line, column=column) from None
        if not math.isfinite(value):
            raise DatasetParseError(f"non-finite value '{field}'", line=line, column=column)
        return value


def read_dataset(file_path: str) -> Dataset:
    return DatasetParser().parse_file(file_path)


def write_dataset(data: Dataset, output_path: str) -> str:
    return DatasetParser().write(data, output_path)
