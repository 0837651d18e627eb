"""Plain CSV matrices: comma separated, '.' decimal point, one optional
header row, no index column."""
import csv
import io

import numpy as np

from .errors import InvalidData


class CsvParseError(InvalidData):
    """A cell could not be read as a finite real number."""

    def __init__(self, path, line, column, message):
        super().__init__(f"{path}: line {line}, column {column}: {message}")
        self.path = path
        self.line = line
        self.column = column


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_matrix(path):
    """Read a numeric CSV file into ``(values, header)``.

    The first row is treated as a header when any of its cells is not a
    number.  ``header`` is ``None`` when the file has none.
    """
    with open(path, newline="") as fh:
        text = fh.read()
    return parse_matrix(text, path)


def parse_matrix(text, path="<string>"):
    rows = list(csv.reader(io.StringIO(text)))
    # line numbers are 1-based and count skipped blank lines
    numbered = [(k + 1, r) for k, r in enumerate(rows) if any(c.strip() for c in r)]
    if not numbered:
        raise CsvParseError(path, 1, 1, "file contains no data")
    header = None
    first_line, first = numbered[0]
    if not all(_is_number(c) for c in first):
        header = [c.strip() for c in first]
        numbered = numbered[1:]
        if not numbered:
            raise CsvParseError(path, first_line + 1, 1, "no data rows after header")
    width = len(header) if header is not None else len(numbered[0][1])
    values = np.empty((len(numbered), width))
    for r, (line, row) in enumerate(numbered):
        if len(row) != width:
            raise CsvParseError(
                path, line, min(len(row), width) + 1,
                f"expected {width} columns, found {len(row)}",
            )
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise CsvParseError(
                    path, line, c + 1, f"cannot parse {cell.strip()!r} as a number"
                ) from None
            if not np.isfinite(v):
                raise CsvParseError(path, line, c + 1, f"non-finite value {cell.strip()!r}")
            values[r, c] = v
    return values, header


def format_number(v):
    return format(float(v), ".17g")


def write_matrix(fh_or_path, values, header=None):
    """Write a matrix with 17 significant digits per cell."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, np.newaxis]
    if isinstance(fh_or_path, (str, bytes)) or hasattr(fh_or_path, "__fspath__"):
        with open(fh_or_path, "w", newline="") as fh:
            _write(fh, values, header)
    else:
        _write(fh_or_path, values, header)


def _write(fh, values, header):
    writer = csv.writer(fh, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    for row in values:
        writer.writerow([format_number(v) for v in row])
