"""
Конфигурация логирования

Диагностика пишется в stderr, чтобы stdout оставался чистым для
результатов.
"""

import sys
from pathlib import Path
from typing import Optional

from loguru import logger

CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}"


def setup_logging(level: str = "INFO", log_file: Optional[str] = None,
                  rotation: str = "10 MB", retention: str = "7 days"):
    """
    Настройка логирования

    Args:
        level: Уровень для консоли
        log_file: Путь к файлу лога; None отключает файловый вывод
        rotation: Размер файла, после которого начинается новый
        retention: Срок хранения старых файлов
    """
    # Удаляем стандартные обработчики
    logger.remove()

    logger.add(
        sys.stderr,
        format=CONSOLE_FORMAT,
        level=level.upper(),
        colorize=sys.stderr.isatty(),
    )

    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_file,
            rotation=rotation,
            retention=retention,
            level="DEBUG",
            format=FILE_FORMAT,
            encoding="utf-8",
        )

    logger.debug(f"Логирование настроено, уровень {level.upper()}")
