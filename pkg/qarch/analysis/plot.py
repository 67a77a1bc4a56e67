#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
SVG renderings of metrics logs and analysis reports. Output depends only
on the input CSV: the SVG hash salt is fixed and no date is embedded.
"""
from typing import List

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from qarch.logging.metrics_log import MetricsRow, MetricsLogException, read_metrics_log
from .macro import KIND_NAMES
from .reports import Report, AnalysisException, load_report

SVG_SALT = 'qarch'
TRAINING_PANELS = [('test_accuracy', 'Test accuracy'), ('episode_reward', 'Episode reward'),
                   ('gates', 'Number of gates'), ('depth', 'Circuit depth')]


def _save(fig, path: str):
    with matplotlib.rc_context({'svg.hashsalt': SVG_SALT, 'svg.fonttype': 'none'}):
        fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)


def plot_training(rows: List[MetricsRow], path: str):
    """
    Four panels against the step: test accuracy, episode reward, gates, depth.
    One line per run.
    """
    fig, axes = plt.subplots(1, 4, figsize=(16, 3.5))
    runs = sorted({r.run_id for r in rows})
    for ax, (name, title) in zip(axes, TRAINING_PANELS):
        for run in runs:
            series = [r for r in rows if r.run_id == run]
            ax.plot([r.step for r in series], [getattr(r, name) for r in series], label=run, linewidth=0.8)
        ax.set_title(title)
        ax.set_xlabel('Step')
        ax.set_ylabel(title)
    if runs:
        axes[0].legend(loc='lower right', fontsize='small')
    fig.tight_layout()
    _save(fig, path)


def plot_metrics_file(csv_path: str, svg_path: str):
    try:
        rows = read_metrics_log(csv_path)
    except (MetricsLogException, IOError) as e:
        raise AnalysisException(f'Unable to plot {csv_path}: {e}')
    plot_training(rows, svg_path)


def _bars(ax, report: Report, label_col: str, value_col: str):
    labels = [str(v) for v in report.column(label_col)]
    ax.bar(range(len(labels)), report.column(value_col))
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha='right')
    ax.set_ylabel(value_col)


def _plot_buckets(ax, report: Report):
    buckets = sorted(set(report.column('accuracy_bucket')))
    depths = sorted(set(report.column('depth')))
    width = 0.8 / max(1, len(depths))
    for k, d in enumerate(depths):
        counts = [sum(c for b2, d2, c in report.rows if b2 == b and d2 == d) for b in buckets]
        ax.bar(np.arange(len(buckets)) + k * width, counts, width=width, label=f'depth {d}')
    ax.set_xticks(np.arange(len(buckets)))
    ax.set_xticklabels(buckets, rotation=45, ha='right')
    ax.set_xlabel('Test accuracy')
    ax.set_ylabel('Unique circuits')
    if depths:
        ax.legend(fontsize='small')


def _plot_by_kind(ax, report: Report, group_col: str, value_col: str):
    groups = sorted(set(report.column(group_col)))
    bottom = np.zeros(len(groups))
    for kind in KIND_NAMES:
        values = np.array([sum(r[report.columns.index(value_col)] for r in report.rows
                               if r[report.columns.index(group_col)] == g and r[1] == kind) for g in groups],
                          dtype=float)
        ax.bar([str(g) for g in groups], values, bottom=bottom, label=kind)
        bottom += values
    ax.set_xlabel(group_col)
    ax.set_ylabel(value_col)
    if groups:
        ax.legend(fontsize='small')


def _plot_transitions(ax, report: Report):
    matrix = np.array([r[2:] for r in report.rows], dtype=float).reshape(-1, len(KIND_NAMES)) \
        if report.rows else np.zeros((len(KIND_NAMES), len(KIND_NAMES)))
    ax.imshow(matrix, vmin=0.0, vmax=1.0, cmap='viridis')
    ax.set_xticks(range(len(KIND_NAMES)))
    ax.set_xticklabels(KIND_NAMES)
    ax.set_yticks(range(len(KIND_NAMES)))
    ax.set_yticklabels(KIND_NAMES)
    ax.set_xlabel('Next gate')
    ax.set_ylabel('Gate')
    for i in range(matrix.shape[0]):
        for j in range(matrix.shape[1]):
            ax.text(j, i, f'{matrix[i, j]:.2f}', ha='center', va='center', fontsize='small', color='w')


def _plot_landscape(ax, report: Report):
    if report.empty:
        return
    xs = sorted(set(report.column(report.columns[0])))
    ys = sorted(set(report.column(report.columns[1])))
    losses = np.array(report.column('loss'), dtype=float).reshape(len(xs), len(ys))
    mesh = ax.contourf(ys, xs, losses, levels=20, cmap='viridis')
    ax.figure.colorbar(mesh, ax=ax, label='Cross-entropy')
    ax.set_xlabel(report.columns[1])
    ax.set_ylabel(report.columns[0])


def _plot_optimization(ax, report: Report):
    """
    Test accuracy per epoch (solid) with the loss on a second axis (dashed)
    """
    epochs = report.column('epoch')
    names = [c[:-len('_loss')] for c in report.columns[1:] if c.endswith('_loss')]
    loss_ax = ax.twinx()
    for k, name in enumerate(names):
        color = f'C{k}'
        ax.plot(epochs, report.column(f'{name}_test_accuracy'), color=color, label=name)
        loss_ax.plot(epochs, report.column(f'{name}_loss'), color=color, linestyle='--', linewidth=0.8)
    ax.set_xlabel('Epoch')
    ax.set_ylabel('Test accuracy')
    loss_ax.set_ylabel('Cross-entropy')
    if names:
        ax.legend(loc='center right', fontsize='small')


PLOT_LUT = {
    'buckets': lambda ax, r: _plot_buckets(ax, r),
    'gate_usage': lambda ax, r: _plot_by_kind(ax, r, 'qubit', 'count'),
    'depth_kinds': lambda ax, r: _plot_by_kind(ax, r, 'depth', 'count'),
    'transitions': lambda ax, r: _plot_transitions(ax, r),
    'patterns': lambda ax, r: _bars(ax, r, 'pattern', 'count'),
    'comparison': lambda ax, r: _bars(ax, r, 'circuit', 'test_accuracy'),
    'landscape': lambda ax, r: _plot_landscape(ax, r),
    'optimization': lambda ax, r: _plot_optimization(ax, r),
}


def plot_report(report: Report, path: str, kind: str = None):
    """
    Render a report; kind selects the renderer and defaults to the report name
    """
    kind = kind or report.name
    renderer = PLOT_LUT.get(kind)
    if renderer is None:
        raise AnalysisException(f'No renderer for report {kind}, choose from {", ".join(PLOT_LUT)}')
    fig, ax = plt.subplots(figsize=(6, 4.5))
    try:
        renderer(ax, report)
    except (ValueError, IndexError) as e:
        plt.close(fig)
        raise AnalysisException(f'Malformed {kind} report: {e}')
    if report.notes:
        ax.set_title(report.notes[-1], fontsize='small')
    fig.tight_layout()
    _save(fig, path)


def plot_report_file(csv_path: str, svg_path: str, kind: str):
    plot_report(load_report(csv_path), svg_path, kind)
