"""
Logging setup for the command-line front end
"""
import logging
import sys

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: str = "WARNING") -> logging.Logger:
    """Attach one stderr handler to the root logger"""
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(getattr(logging, str(level).upper(), logging.WARNING))
    return root


def progress_logger(name: str):
    """Progress callback that forwards harness status messages to a logger"""
    log = logging.getLogger(name)

    def callback(message: str):
        log.info(message)

    return callback
