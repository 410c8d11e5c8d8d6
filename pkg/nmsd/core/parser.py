"""
CSV matrix parser.

Reads and writes rectangular numeric CSV files. Rows of the file are features
and columns are samples unless a transpose is requested.
"""

import csv
import math
from pathlib import Path
from typing import List

import numpy as np

from nmsd.core.errors import ParseError
from nmsd.models.data import DataMatrix


class Parser:
    """Parser for numeric CSV matrices."""

    @staticmethod
    def load(path: str, has_header: bool = False, transpose: bool = False) -> DataMatrix:
        """
        Load a data matrix from a CSV file.

        Args:
            path: Path to the CSV file
            has_header: Skip the first line
            transpose: Treat file rows as samples instead of features

        Returns:
            DataMatrix with features as rows

        Raises:
            ParseError: If the file is missing, ragged, or holds non-numeric cells
        """
        try:
            content = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ParseError(f"Cannot read {path}: {e}")
        return Parser.parse(content, has_header=has_header, transpose=transpose)

    @staticmethod
    def parse(content: str, has_header: bool = False, transpose: bool = False) -> DataMatrix:
        """
        Parse CSV text into a data matrix.

        Args:
            content: CSV text
            has_header: Skip the first line
            transpose: Treat rows as samples instead of features

        Returns:
            DataMatrix with features as rows

        Raises:
            ParseError: If parsing or validation fails
        """
        if not content or not content.strip():
            raise ParseError("Matrix file is empty")

        rows: List[List[float]] = []
        width = None
        for line_no, cells in enumerate(csv.reader(content.splitlines()), start=1):
            if has_header and line_no == 1:
                continue
            if not cells or all(not c.strip() for c in cells):
                continue
            row = [Parser._cell(cell, line_no, col) for col, cell in enumerate(cells, start=1)]
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(f"expected {width} values, found {len(row)}", line=line_no)
            rows.append(row)

        if not rows:
            raise ParseError("Matrix file has no data rows")

        values = np.array(rows, dtype=float)
        if transpose:
            values = values.T
        return DataMatrix(values)

    @staticmethod
    def _cell(cell: str, line: int, col: int) -> float:
        """Convert one CSV cell to a finite float."""
        try:
            value = float(cell.strip())
        except ValueError:
            raise ParseError(f"non-numeric value {cell.strip()!r}", line=line, col=col)
        if not math.isfinite(value):
            raise ParseError(f"non-finite value {cell.strip()!r}", line=line, col=col)
        return value

    @staticmethod
    def write(path: str, Y: DataMatrix) -> None:
        """Write a data matrix as CSV, features as rows, at full precision."""
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            for row in Y.values:
                writer.writerow([repr(float(v)) for v in row])


def load_matrix(path: str, has_header: bool = False, transpose: bool = False) -> DataMatrix:
    """Load a CSV matrix; see Parser.load."""
    return Parser.load(path, has_header=has_header, transpose=transpose)


def write_matrix(path: str, Y: DataMatrix) -> None:
    """Write a CSV matrix; see Parser.write."""
    Parser.write(path, Y)
