from .metrics import EpisodeEval, MetricsReport, aggregate, hit_rate_at
from .runner import (
    CURVES_NAME,
    REPORT_NAME,
    evaluate_policy,
    write_curves,
    write_report,
)

__all__ = [
    "EpisodeEval",
    "MetricsReport",
    "aggregate",
    "hit_rate_at",
    "CURVES_NAME",
    "REPORT_NAME",
    "evaluate_policy",
    "write_curves",
    "write_report",
]
