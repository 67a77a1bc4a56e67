#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Logger used inside qarch. Subsystems (environment, agents, cache, inner loop)
log through children of the package logger so a caller can silence or
redirect one of them, e.g. logging.getLogger("QARCH.inner").setLevel(...).
"""

import logging

QARCHLOG = logging.getLogger("QARCH")
QARCHLOG.setLevel(logging.INFO)

CLI_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"


def set_logger(logger):
    """
    Provide your own logger for qarch
    """
    global QARCHLOG
    QARCHLOG = logger


def get_logger(subsystem: str = None):
    """
    Get the default qarch logger or the child logger of a subsystem
    :param subsystem: e.g. 'env', 'agent', 'cache', 'inner'
    """
    if subsystem is None:
        return QARCHLOG
    return QARCHLOG.getChild(subsystem)


def configure_cli_logging(debug: int or None = None) -> None:
    """
    Root logging setup for the command line utility. One or more -d flags
    switch to DEBUG.
    :param debug: count of -d flags or None
    """
    level = logging.DEBUG if debug else logging.INFO
    logging.basicConfig(level=level, format=CLI_FORMAT)
    QARCHLOG.setLevel(level)
