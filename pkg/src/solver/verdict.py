"""
Вердикты решателя, бюджет и подстановка модели в seed
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping, Optional

DEFAULT_TIMEOUT = 10.0
DEFAULT_MAX_BYTES = 3
DEFAULT_CHECK_INTERVAL = 1 << 16


class SolverStatus(Enum):
    """Статусы решения"""
    SAT = "sat"
    UNSAT = "unsat"
    TIMEOUT = "timeout"


class QueryTooWideError(ValueError):
    """Запрос содержит больше символьных байтов, чем допускает перебор"""

    def __init__(self, width: int, max_bytes: int):
        self.width = width
        self.max_bytes = max_bytes
        super().__init__(
            f"Запрос слишком широк для точного перебора: {width} байт при допустимых {max_bytes}"
        )


@dataclass(frozen=True)
class SolverBudget:
    """Ограничения на один запрос"""
    max_bytes: int = DEFAULT_MAX_BYTES
    time_limit: float = DEFAULT_TIMEOUT
    # Кандидатов между кооперативными проверками времени
    check_interval: int = DEFAULT_CHECK_INTERVAL


@dataclass(frozen=True)
class Verdict:
    """Результат решения запроса"""
    status: SolverStatus
    model: Optional[Dict[int, int]] = field(default=None, hash=False)
    candidates_tried: int = 0
    elapsed: float = 0.0
    backend: str = "brute_force"

    @property
    def is_sat(self) -> bool:
        return self.status is SolverStatus.SAT


def merge_model(model: Optional[Mapping[int, int]], seed: bytes) -> bytes:
    """
    Полный вход: значения модели поверх seed

    Args:
        model: Значения байтов по индексам
        seed: Исходный вход

    Returns:
        output[i] = model[i], если задано, иначе seed[i]
    """
    buffer = bytearray(seed)
    for index, value in (model or {}).items():
        if not 0 <= index < len(buffer):
            raise ValueError(f"Индекс байта модели {index} вне входа длиной {len(buffer)}")
        if not 0 <= value <= 0xFF:
            raise ValueError(f"Значение байта модели {value} вне диапазона 0..255")
        buffer[index] = value
    return bytes(buffer)
