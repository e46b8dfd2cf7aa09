"""Exporter failure types."""


class ExporterError(Exception):
    """Job-level problem: bad config, unknown method, missing model stack.

    Per-mosaic trouble is never raised; it is collected on the report.
    """
