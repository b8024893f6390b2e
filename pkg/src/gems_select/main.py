# gems_select/main.py
import logging
import sys

from gems_select.config.logging_config import setup_logging
from gems_select.config.settings import DEBUG
from gems_select.utils.run_cli import cli


def main():
    """Main entry point for the application"""
    setup_logging(level=logging.DEBUG if DEBUG else logging.INFO)
    if DEBUG:
        import snoop

        snoop.install(out=lambda msg: logging.getLogger("snoop").info(msg))
    return cli()


if __name__ == "__main__":
    sys.exit(main())
