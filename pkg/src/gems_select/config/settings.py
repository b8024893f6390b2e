# gems_select/config/settings.py
import os

from dotenv import load_dotenv

from gems_select.config.defaults import DEFAULT_WORKERS

load_dotenv()

DEBUG = os.environ.get("GEMS_SELECT_DEBUG", "").lower() in ("1", "true", "yes")
WORKERS = int(os.environ.get("GEMS_SELECT_WORKERS", DEFAULT_WORKERS))
LOG_DIR = os.environ.get("GEMS_SELECT_LOG_DIR", "")
