import logging
from pathlib import Path
from typing import Optional, Union

LOG_FORMAT = '%(asctime)s--%(levelname)s--%(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def setup_logger(
    path: Optional[Union[str, Path]] = None,
    level: int = logging.INFO,
    stream: bool = True,
) -> logging.Logger:
    """
    Attach run handlers to the ``infermarl`` logger.

    Args:
        path: File receiving the run log (``run.log`` in the run directory); skipped when None
        level: Threshold for both handlers
        stream: Also echo to stderr
    """
    logger = logging.getLogger("infermarl")
    logger.setLevel(level)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(path, encoding="utf-8")
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    if stream:
        stream_handler = logging.StreamHandler()
        stream_handler.setFormatter(formatter)
        logger.addHandler(stream_handler)
    return logger
