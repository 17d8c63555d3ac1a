from .store import StoreRecord, MetricStoreWriter, read_store, write_store
from .session import Session, SessionConfig, ScopeState
from .sources import FakeKernelSource, FileKernelSource, KernelSource, LiveKernelSource

__all__ = [
    "StoreRecord",
    "MetricStoreWriter",
    "read_store",
    "write_store",
    "Session",
    "SessionConfig",
    "ScopeState",
    "KernelSource",
    "FakeKernelSource",
    "FileKernelSource",
    "LiveKernelSource",
]
