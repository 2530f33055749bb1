# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

"""
Multi-path Transformer encoder, numpy autodiff and the tools around them.
"""
