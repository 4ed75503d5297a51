"""Enrich a hierarchical text taxonomy with knowledge-base entities and
classify text against the enriched categories."""

from taxenrich.errors import DataError, PipelineError

__version__ = "0.1.0"

__all__ = ["DataError", "PipelineError", "__version__"]
