# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: 0BSD

# Ensure it's present.
import setuptools_scm  # noqa: F401
from setuptools import setup

setup()
