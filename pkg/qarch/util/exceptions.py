#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers


class ConfigException(Exception):
    """
    Invalid configuration value or unreadable configuration file
    """
    def __init__(self, msg: str):
        super().__init__(f'ConfigException: {msg}')
