import json
import logging
import logging.config
import os
from pathlib import Path

from shared.utils.helper import project_path

LOG_DIR_ENV = "AUTHCAP_LOG_DIR"


def setup_logging(name: str = "", config_name: str = "log_config.json") -> logging.Logger:
    """
    Setup logging configuration from JSON file.

    The file handler's filename in the config is relative to the log
    directory: ``AUTHCAP_LOG_DIR`` when set, else ``data/logs`` in the
    workspace root.

    Args:
        name: Logger name to return (defaults to this module's name)
        config_name: Name of the logging config file
    """
    if name == "":
        name = __name__

    log_dir = os.getenv(LOG_DIR_ENV)
    log_dir = project_path(["data", "logs"]) if not log_dir else project_path().joinpath(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)

    config_path = Path(__file__).resolve().parents[1] / "config" / config_name

    if not config_path.exists():
        raise FileNotFoundError(f"Logging config not found: {config_path}")

    with open(config_path, "r") as f:
        config = json.load(f)
        filename = config['handlers']['file']['filename']
        config['handlers']['file']['filename'] = str(log_dir / filename)

    # Apply configuration
    logging.config.dictConfig(config)

    return logging.getLogger(name)
