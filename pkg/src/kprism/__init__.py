"""kprism: thread-granular performance-degradation diagnosis toolkit."""

__version__ = "0.1.0"
