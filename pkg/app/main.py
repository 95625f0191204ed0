"""Command-line entry point."""

import logging

from app.cli import app
from app.core.config import get_settings

logger = logging.getLogger(__name__)


def configure_logging() -> None:
    """Configure root logging from the toolkit settings."""
    settings = get_settings()
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    logger.debug(f"logging at {settings.log_level}, {settings.workers} workers")


def run() -> None:
    """Configure logging, then dispatch to the CLI."""
    configure_logging()
    app()


if __name__ == "__main__":
    run()
