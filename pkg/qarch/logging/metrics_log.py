#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Append-only per-step metrics log in CSV. The first line is '#schema=<n>',
the second the column names. Floats are written in shortest round-trip
form so reading and rewriting a log reproduces it byte for byte.
"""
import csv
import io
import os
from typing import List, Dict

from recordclass import recordclass

SCHEMA_VERSION = 1
SCHEMA_LINE = f'#schema={SCHEMA_VERSION}'

METRICS_FIELDS = ['run_id', 'step', 'episode', 'action_gate', 'action_qubit', 'legal', 'reward',
                  'episode_reward', 'test_accuracy', 'gates', 'depth', 'done', 'done_reason',
                  'circuit_hash', 'wall_time']

_INT_FIELDS = {'step', 'episode', 'action_gate', 'action_qubit', 'gates', 'depth'}
_FLOAT_FIELDS = {'reward', 'episode_reward', 'test_accuracy', 'wall_time'}
_BOOL_FIELDS = {'legal', 'done'}

MetricsRow = recordclass('MetricsRow', METRICS_FIELDS)


class MetricsLogException(Exception):
    def __init__(self, msg: str):
        super().__init__(f'MetricsLogException: {msg}')


def format_value(name: str, value) -> str:
    if name in _FLOAT_FIELDS:
        return repr(float(value))
    if name in _BOOL_FIELDS:
        return '1' if value else '0'
    if name in _INT_FIELDS:
        return str(int(value))
    return '' if value is None else str(value)


def parse_value(name: str, text: str):
    if name in _FLOAT_FIELDS:
        return float(text)
    if name in _BOOL_FIELDS:
        return text == '1'
    if name in _INT_FIELDS:
        return int(text)
    return text


def empty_row(run_id: str) -> MetricsRow:
    return MetricsRow(run_id=run_id, step=0, episode=0, action_gate=0, action_qubit=0, legal=True,
                      reward=0.0, episode_reward=0.0, test_accuracy=0.0, gates=0, depth=0, done=False,
                      done_reason='', circuit_hash='', wall_time=0.0)


def format_row(row: MetricsRow) -> List[str]:
    return [format_value(f, getattr(row, f)) for f in METRICS_FIELDS]


class MetricsLog:
    """
    Writer for one metrics file; several runs may share a file, steps must
    be strictly increasing per run_id
    """

    def __init__(self, path: str, *, append: bool = False):
        self.path = path
        self._last_step: Dict[str, int] = dict()
        exists = os.path.exists(path) and os.path.getsize(path) > 0
        if append and exists:
            for row in read_metrics_log(path):
                self._last_step[row.run_id] = row.step
            self._file = open(path, 'a', newline='')
        else:
            self._file = open(path, 'w', newline='')
            self._file.write(SCHEMA_LINE + '\n')
            csv.writer(self._file, lineterminator='\n').writerow(METRICS_FIELDS)
        self._writer = csv.writer(self._file, lineterminator='\n')
        self.rows_written = 0

    def append(self, row: MetricsRow) -> None:
        last = self._last_step.get(row.run_id)
        if last is not None and row.step <= last:
            raise MetricsLogException(f'Step {row.step} of run {row.run_id} does not follow step {last}')
        self._writer.writerow(format_row(row))
        self._file.flush()
        self._last_step[row.run_id] = row.step
        self.rows_written += 1

    def close(self):
        if not self._file.closed:
            self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()


def parse_metrics_log(text: str) -> List[MetricsRow]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith('#schema='):
        raise MetricsLogException('Missing schema line')
    version = lines[0][len('#schema='):]
    if version != str(SCHEMA_VERSION):
        raise MetricsLogException(f'Unsupported schema version {version}')
    reader = csv.reader(io.StringIO('\n'.join(lines[1:])))
    header = next(reader, None)
    if header != METRICS_FIELDS:
        raise MetricsLogException(f'Unexpected columns {header}')
    rows = list()
    for n, fields in enumerate(reader, start=3):
        if len(fields) != len(METRICS_FIELDS):
            raise MetricsLogException(f'Line {n} has {len(fields)} columns, expected {len(METRICS_FIELDS)}')
        try:
            rows.append(MetricsRow(**{f: parse_value(f, v) for f, v in zip(METRICS_FIELDS, fields)}))
        except ValueError as e:
            raise MetricsLogException(f'Line {n}: {e}')
    return rows


def read_metrics_log(path: str) -> List[MetricsRow]:
    with open(path, 'r', newline='') as f:
        return parse_metrics_log(f.read())


def write_metrics_log(path: str, rows: List[MetricsRow]) -> None:
    with MetricsLog(path) as log:
        for row in rows:
            log.append(row)
