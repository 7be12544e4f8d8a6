"""
Менеджер решателей: выбор бэкенда и запасной путь для широких запросов
"""

from dataclasses import replace
from typing import Any, Dict, Optional

from loguru import logger

from ..strategies.predicate_builder import InversionQuery
from .brute_force import BruteForceSolver
from .external_solver import ExternalSolver
from .verdict import (
    DEFAULT_CHECK_INTERVAL, DEFAULT_MAX_BYTES, DEFAULT_TIMEOUT,
    QueryTooWideError, SolverBudget, Verdict,
)

BACKENDS = ("brute_force", "external")


class SolverManager:
    """
    Менеджер решателей
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        """
        Инициализация менеджера

        Args:
            config: Секция solver конфигурации
        """
        config = config or {}
        self.backend = config.get("backend", "brute_force")
        if self.backend not in BACKENDS:
            raise ValueError(f"Неизвестный бэкенд решателя: {self.backend}")

        self.budget = SolverBudget(
            max_bytes=int(config.get("max_bytes", DEFAULT_MAX_BYTES)),
            time_limit=float(config.get("timeout", DEFAULT_TIMEOUT)),
            check_interval=int(config.get("check_interval", DEFAULT_CHECK_INTERVAL)),
        )
        self.brute_force = BruteForceSolver(self.budget)

        command = config.get("external_command") or ""
        self.external: Optional[ExternalSolver] = None
        if command:
            self.external = ExternalSolver(command, self.budget)
        elif self.backend == "external":
            raise ValueError("Для бэкенда external нужна команда solver.external_command")

        logger.debug(
            f"Решатель: {self.backend}, таймаут {self.budget.time_limit} с, "
            f"до {self.budget.max_bytes} байт перебором"
        )

    def solve(self, query: InversionQuery, seed: bytes,
              time_limit: Optional[float] = None) -> Verdict:
        """
        Решение запроса выбранным бэкендом

        Args:
            query: Запрос
            seed: Исходный вход, из него берутся значения вне модели
            time_limit: Таймаут вместо заданного в конфигурации

        Raises:
            QueryTooWideError: запрос шире бюджета перебора и внешний
                решатель не настроен
        """
        budget = self.budget
        if time_limit is not None:
            budget = replace(budget, time_limit=time_limit)
        if self.backend == "external":
            return self.external.solve(query, seed, budget)
        try:
            return self.brute_force.solve(query, seed, budget)
        except QueryTooWideError as e:
            if self.external is None:
                raise
            logger.warning(f"{e}; запрос передан внешнему решателю")
            return self.external.solve(query, seed, budget)
