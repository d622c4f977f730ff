# Copyright 2026 The sparrow-forge Authors
# SPDX-License-Identifier: Apache-2.0
"""Turn long text instructions into rendered frames, mix datasets, judge answers."""

import os as _os

_assets = _os.path.join(_os.path.dirname(__file__), "assets")
if _os.path.isdir(_assets):
    _os.environ.setdefault("SPARROW_FORGE_ASSETS", _assets)

from ._sparrow_forge import (  # noqa: E402
    ArgumentError,
    CapacityError,
    ConfigError,
    DanglingReferenceError,
    IntegrityError,
    NumericalError,
    ParseError,
    ProviderError,
    SparrowForgeError,
    __version__,
    build_judge_prompt,
    chunk_text,
    cluster_stats,
    exact_match,
    mix,
    plan_frames,
    render_text,
    run_cli,
    synthesize,
    tsne,
)

__all__ = [
    "ArgumentError",
    "CapacityError",
    "ConfigError",
    "DanglingReferenceError",
    "IntegrityError",
    "NumericalError",
    "ParseError",
    "ProviderError",
    "SparrowForgeError",
    "__version__",
    "build_judge_prompt",
    "chunk_text",
    "cluster_stats",
    "exact_match",
    "mix",
    "plan_frames",
    "render_text",
    "run_cli",
    "synthesize",
    "tsne",
]
