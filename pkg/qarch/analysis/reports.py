#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
CSV reports. A report file is optional '# ' note lines, a header row and
data rows. Integers are written with str(), floats in shortest round-trip
form, so reading and rewriting a report reproduces it byte for byte.
"""
import csv
import io
from dataclasses import dataclass, field
from typing import List, Any


class AnalysisException(Exception):
    """
    Missing or unusable analysis inputs
    """
    def __init__(self, msg: str):
        super().__init__(f'AnalysisException: {msg}')


def format_cell(value) -> str:
    if isinstance(value, bool):
        return '1' if value else '0'
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, 'item'):
        return format_cell(value.item())
    return str(value)


def parse_cell(text: str):
    """
    int or float when the text is exactly how that value would be written,
    the text itself otherwise
    """
    try:
        if str(int(text)) == text:
            return int(text)
    except ValueError:
        pass
    try:
        if repr(float(text)) == text:
            return float(text)
    except ValueError:
        pass
    return text


@dataclass
class Report:
    name: str
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return len(self.rows) == 0

    def column(self, name: str) -> List[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        out = io.StringIO()
        for note in self.notes:
            out.write(f'# {note}\n')
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(self.columns)
        for row in self.rows:
            if len(row) != len(self.columns):
                raise AnalysisException(f'Row {row} of {self.name} does not match columns {self.columns}')
            writer.writerow([format_cell(v) for v in row])
        return out.getvalue()

    def save(self, path: str):
        with open(path, 'w', newline='') as f:
            f.write(self.to_csv())


def parse_report(name: str, text: str) -> Report:
    lines = text.splitlines()
    notes = list()
    while lines and lines[0].startswith('# '):
        notes.append(lines.pop(0)[2:])
    reader = csv.reader(io.StringIO('\n'.join(lines)))
    columns = next(reader, None)
    if not columns:
        raise AnalysisException(f'Report {name} has no header')
    rows = list()
    for n, row in enumerate(reader):
        if len(row) != len(columns):
            raise AnalysisException(f'Row {n} of {name} has {len(row)} cells, expected {len(columns)}')
        rows.append([parse_cell(c) for c in row])
    return Report(name=name, columns=columns, rows=rows, notes=notes)


def load_report(path: str) -> Report:
    try:
        with open(path, 'r', newline='') as f:
            text = f.read()
    except IOError as e:
        raise AnalysisException(f'Unable to read report {path}: {e}')
    return parse_report(path, text)
