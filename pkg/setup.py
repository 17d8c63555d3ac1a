"""Build script: compiles the hot aggregation engine with Cython when possible.

The engine lives in ``src/kprism/metrics_core/_engine_py.py`` and is written in
Cython's pure-python mode, so the exact same source runs interpreted (fallback)
or compiled (``kprism.metrics_core._engine_cy``).  The compiled twin is
optional: if Cython or a C compiler is missing the package still installs and
selects the interpreted engine at import time.
"""

import shutil
from pathlib import Path

from setuptools import setup

ENGINE_SRC = Path("src/kprism/metrics_core/_engine_py.py")
ENGINE_CY = Path("src/kprism/metrics_core/_engine_cy.py")


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    # Compile a copy so the interpreted module keeps its own name/identity.
    shutil.copyfile(ENGINE_SRC, ENGINE_CY)
    try:
        return cythonize([str(ENGINE_CY)], language_level=3)
    except Exception:
        return []


setup(ext_modules=_extensions())
