import pytest

from kprism.metrics_core import _engine_py

_BACKENDS = [("python", _engine_py.MetricsEngine)]
try:
    from kprism.metrics_core import _engine_cy

    _BACKENDS.append(("compiled", _engine_cy.MetricsEngine))
except ImportError:  # pragma: no cover - compiled twin is optional
    pass


@pytest.fixture(params=_BACKENDS, ids=[name for name, _ in _BACKENDS])
def engine_cls(request):
    """Both engine implementations must pass every behavioural test."""
    return request.param[1]


@pytest.fixture
def engine(engine_cls):
    return engine_cls()
