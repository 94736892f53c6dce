# SPDX-FileCopyrightText: 2024 The lambda-interference Authors
#
# SPDX-License-Identifier: 0BSD
