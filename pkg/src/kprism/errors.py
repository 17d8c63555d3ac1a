"""Exception hierarchy shared across the package.

Kept in one module so the interpreted and compiled engine twins raise the
same classes.
"""


class KprismError(Exception):
    """Base class for all package errors."""


class TraceError(KprismError):
    """Malformed trace file or event stream."""


class FlushError(KprismError):
    """Interval flushed twice or out of order."""


class AnalysisError(KprismError):
    """Analysis refused (insufficient overlap, bad inputs)."""


class ConfigError(KprismError):
    """Invalid session or command configuration."""


class ProbePrivilegeError(KprismError):
    """Kernel probes require privileges the process does not have."""


class ProbeUnavailableError(KprismError):
    """No kernel probe backend is available on this host."""


class WorkloadError(KprismError):
    """Benchmark workload failed or produced unparseable output."""
