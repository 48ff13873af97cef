"""Python access to the HDI classification and clustering toolkit."""

import json

from ._core import (
    HdiError,
    adjusted_rand_index,
    categorize,
    format_percent,
    kmeans,
    planted_clusters,
    run_cli,
)
from ._core import confusion_metrics as _confusion_metrics


def confusion_metrics(classes, rows):
    """Metrics dict for a square block of counts over the named classes."""
    return json.loads(_confusion_metrics(list(classes), [list(r) for r in rows]))


__all__ = [
    "HdiError",
    "adjusted_rand_index",
    "categorize",
    "confusion_metrics",
    "format_percent",
    "kmeans",
    "planted_clusters",
    "run_cli",
]
