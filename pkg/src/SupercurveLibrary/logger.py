from pprint import pformat
from typing import Any

from robot.api import logger


class Logger:
    @staticmethod
    def info(message: str) -> None:
        logger.info(message)

    @staticmethod
    def debug(message: str) -> None:
        logger.debug(message)

    @staticmethod
    def warn(message: str) -> None:
        logger.warn(message)

    @staticmethod
    def log_rows(title: str, header: Any, rows: Any) -> None:
        logger.info(f"{title}\n{pformat([tuple(header), *rows])}")
