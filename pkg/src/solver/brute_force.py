"""
Точный решатель перебором значений символьных байтов запроса
"""

import itertools
import time
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from loguru import logger

from ..strategies.predicate_builder import InversionQuery
from ..symbolic.expressions import SymExpr, evaluate
from .verdict import QueryTooWideError, SolverBudget, SolverStatus, Verdict

BYTE_VALUES = 256
# Сколько младших переменных перебирается одним векторным блоком
GRID_VARIABLES = 2


def enumeration_order(seed_value: int) -> np.ndarray:
    """Значения байта начиная с seed по возрастанию с переходом через 0xFF"""
    return np.roll(np.arange(BYTE_VALUES, dtype=np.uint32), -int(seed_value))


class BruteForceSolver:
    """
    Перебор в лексикографическом порядке

    Первая по индексу переменная старшая, каждая перебирается от своего
    значения в seed по возрастанию с переходом через 0xFF. Две младшие
    переменные вычисляются сеткой 256x256 на numpy, старшие перебираются
    поблочно; время проверяется между блоками.
    """

    name = "brute_force"

    def __init__(self, budget: Optional[SolverBudget] = None,
                 clock: Callable[[], float] = time.monotonic):
        self.budget = budget or SolverBudget()
        self.clock = clock

    def solve(self, query: InversionQuery, seed: bytes,
              budget: Optional[SolverBudget] = None) -> Verdict:
        budget = budget or self.budget
        variables = sorted(query.variables)
        if len(variables) > budget.max_bytes:
            raise QueryTooWideError(len(variables), budget.max_bytes)
        for index in variables:
            if index >= len(seed):
                raise ValueError(f"Байт {index} запроса вне seed длиной {len(seed)}")

        start = self.clock()
        orders = {index: enumeration_order(seed[index]) for index in variables}
        inner = variables[-GRID_VARIABLES:] if variables else []
        outer = variables[:len(variables) - len(inner)]
        grid_shape = (BYTE_VALUES,) * len(inner)
        grid_size = int(np.prod(grid_shape, dtype=np.int64))

        grid_env: Dict[int, np.ndarray] = {}
        for axis, index in enumerate(inner):
            shape = [1] * len(inner)
            shape[axis] = BYTE_VALUES
            grid_env[index] = orders[index].reshape(shape)
        scalar_shape = (1,) * len(inner)

        tried = 0
        since_check = 0
        for outer_values in itertools.product(*(orders[index] for index in outer)):
            env = dict(grid_env)
            for index, value in zip(outer, outer_values):
                env[index] = np.full(scalar_shape, value, dtype=np.uint32)

            mask = self._mask(query.conjuncts, env, grid_shape)
            flat = mask.ravel()
            if flat.any():
                hit = int(np.argmax(flat))
                model = {index: int(value) for index, value in zip(outer, outer_values)}
                if inner:
                    position = np.unravel_index(hit, grid_shape)
                    for axis, index in enumerate(inner):
                        model[index] = int(orders[index][position[axis]])
                tried += hit + 1
                return self._verdict(SolverStatus.SAT, model, tried, start)

            tried += grid_size
            since_check += grid_size
            if since_check >= budget.check_interval:
                since_check = 0
                if self.clock() - start >= budget.time_limit:
                    logger.debug(f"Перебор прерван по времени после {tried} кандидатов")
                    return self._verdict(SolverStatus.TIMEOUT, None, tried, start)

        return self._verdict(SolverStatus.UNSAT, None, tried, start)

    @staticmethod
    def _mask(conjuncts: Sequence[SymExpr], env, grid_shape) -> np.ndarray:
        mask = np.ones(grid_shape, dtype=bool)
        for expr in conjuncts:
            np.logical_and(mask, evaluate(expr, env), out=mask)
            if not mask.any():
                break
        return mask

    def _verdict(self, status: SolverStatus, model, tried: int, start: float) -> Verdict:
        return Verdict(
            status=status,
            model=model,
            candidates_tried=tried,
            elapsed=self.clock() - start,
            backend=self.name,
        )


def solve(query: InversionQuery, seed: bytes, budget: Optional[SolverBudget] = None) -> Verdict:
    """
    Решение запроса перебором

    Raises:
        QueryTooWideError: символьных байтов больше budget.max_bytes
    """
    return BruteForceSolver(budget).solve(query, seed)

