from .kpi import KpiSeries, load_kpi_csv
from .tracking import (
    Candidate,
    TrackingReport,
    detect_entrypoints,
    device_share,
    flag_candidates,
    counterpart_threads,
    track,
)
from .report import report_to_json, load_report, format_report, write_plot_data

__all__ = [
    "KpiSeries",
    "load_kpi_csv",
    "Candidate",
    "TrackingReport",
    "detect_entrypoints",
    "device_share",
    "flag_candidates",
    "counterpart_threads",
    "track",
    "report_to_json",
    "load_report",
    "format_report",
    "write_plot_data",
]
