"""Logging configuration shared by the API and the CLI."""

import logging

from mcdcsk.config import settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

_configured = False


def configure_logging(level: str | None = None) -> logging.Logger:
    """Configure root logging once and attach Application Insights if requested."""
    global _configured
    root = logging.getLogger()
    root.setLevel((level or settings.log_level).upper())
    if _configured:
        return root

    logging.basicConfig(level=(level or settings.log_level).upper(), format=LOG_FORMAT)
    _configured = True

    # Configure Application Insights if connection string is provided
    if settings.applicationinsights_connection_string:
        try:
            from opencensus.ext.azure.log_exporter import AzureLogHandler

            root.addHandler(
                AzureLogHandler(
                    connection_string=settings.applicationinsights_connection_string
                )
            )
            root.info("Application Insights logging configured")
        except Exception as e:
            root.warning(f"Failed to configure Application Insights: {e}")
    return root
