# gems_select/config/logging_config.py
import logging
from pathlib import Path
from typing import Optional

from gems_select.config import settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(level: int = logging.INFO, log_dir: Optional[Path] = None) -> Path:
    """Setup console and file logging.

    Args:
        level: Root log level.
        log_dir: Directory for ``gems_select.log``; defaults to ``GEMS_SELECT_LOG_DIR``
            or ``./logs``.

    Returns:
        Path of the log file.
    """
    if log_dir is None:
        log_dir = Path(settings.LOG_DIR) if settings.LOG_DIR else Path.cwd() / "logs"
    log_dir.mkdir(parents=True, exist_ok=True)

    log_file = log_dir / "gems_select.log"

    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        handlers=[
            logging.StreamHandler(),
            logging.FileHandler(str(log_file)),
        ],
        force=True,
    )

    # snoop output goes to the file only
    snoop_logger = logging.getLogger("snoop")
    snoop_logger.setLevel(logging.INFO)
    snoop_logger.propagate = False
    for handler in list(snoop_logger.handlers):
        snoop_logger.removeHandler(handler)
        handler.close()
    snoop_handler = logging.FileHandler(str(log_file))
    snoop_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    snoop_logger.addHandler(snoop_handler)

    return log_file
