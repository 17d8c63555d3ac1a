"""Aggregation engine with compiled/interpreted twin selection.

The Cython-compiled engine (``_engine_cy``) is preferred when built; the
interpreted module (``_engine_py``) is the fallback and the source of truth.
Set ``KPRISM_PURE=1`` to force the interpreted engine.
"""

import os

from ._engine_py import MetricsEngine as _PyMetricsEngine

ENGINE_BACKEND = "python"
MetricsEngine = _PyMetricsEngine

if not os.environ.get("KPRISM_PURE"):
    try:
        from . import _engine_cy as _cy
    except ImportError:
        _cy = None
    # Guard against an uncompiled leftover copy of the source.
    if _cy is not None and not getattr(_cy, "__file__", "").endswith(".py"):
        MetricsEngine = _cy.MetricsEngine
        ENGINE_BACKEND = "compiled"

__all__ = ["MetricsEngine", "ENGINE_BACKEND"]
