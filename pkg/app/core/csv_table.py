"""Rectangular numeric tables rendered as CSV with `#` comment lines."""
import csv
import io
import math
from typing import Union

from pydantic import BaseModel, ConfigDict, model_validator

Cell = Union[int, float, str, None]


def format_number(value: Cell) -> str:
    """17 significant digits for floats so every double parses back exactly."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


class CsvTable(BaseModel):
    header: tuple[str, ...]
    rows: tuple[tuple[Cell, ...], ...] = ()
    comments: tuple[str, ...] = ()

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_rectangular(self) -> "CsvTable":
        width = len(self.header)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} cells, header has {width}")
        return self

    def column(self, name: str) -> list[Cell]:
        index = self.header.index(name)
        return [row[index] for row in self.rows]

    def render(self) -> str:
        buffer = io.StringIO()
        for comment in self.comments:
            buffer.write(f"# {comment}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([format_number(cell) for cell in row])
        return buffer.getvalue()

    @classmethod
    def parse(cls, text: str) -> "CsvTable":
        """Read back a rendered table; numeric cells come back as float."""
        comments = [line[1:].strip() for line in text.splitlines() if line.startswith("#")]
        body = [line for line in text.splitlines() if line and not line.startswith("#")]
        reader = csv.reader(body)
        header = tuple(next(reader))
        rows = tuple(tuple(float(cell) if cell else None for cell in row) for row in reader)
        return cls(header=header, rows=rows, comments=tuple(comments))
