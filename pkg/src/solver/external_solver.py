"""
Адаптер внешнего SMT-решателя через стандартные потоки процесса

Контракт: скрипт подается на stdin, первая строка stdout содержит
sat, unsat или unknown, далее идут привязки модели (define-fun).
"""

import re
import shlex
import subprocess
import time
from typing import Dict, Optional, Sequence, Tuple, Union

from loguru import logger

from ..strategies.predicate_builder import InversionQuery
from .smt_export import export_smt
from .verdict import SolverBudget, SolverStatus, Verdict

_BINDING_RE = re.compile(
    r"\(define-fun\s+k!(\d+)\s+\(\)\s+\(_\s+BitVec\s+8\)\s+"
    r"(#x[0-9a-fA-F]+|#b[01]+|\(_\s+bv(\d+)\s+8\))\s*\)"
)
_STATUSES = {"sat": SolverStatus.SAT, "unsat": SolverStatus.UNSAT, "unknown": SolverStatus.TIMEOUT}


class ExternalSolverError(ValueError):
    """Сбой внешнего решателя или неразборчивый ответ"""


def _literal_value(literal: str, decimal: Optional[str]) -> int:
    if decimal is not None:
        return int(decimal)
    if literal.startswith("#x"):
        return int(literal[2:], 16)
    return int(literal[2:], 2)


def parse_solver_output(output: str) -> Tuple[SolverStatus, Dict[int, int]]:
    """
    Разбор ответа решателя

    Returns:
        Статус и привязки k!<i> -> значение байта
    """
    lines = [line.strip() for line in output.splitlines() if line.strip()]
    if not lines or lines[0] not in _STATUSES:
        head = lines[0] if lines else ""
        raise ExternalSolverError(f"Неожиданный ответ внешнего решателя: '{head}'")
    status = _STATUSES[lines[0]]

    bindings: Dict[int, int] = {}
    for match in _BINDING_RE.finditer(output):
        value = _literal_value(match.group(2), match.group(3))
        if not 0 <= value <= 0xFF:
            raise ExternalSolverError(f"Значение k!{match.group(1)} вне диапазона байта: {value}")
        bindings[int(match.group(1))] = value
    return status, bindings


class ExternalSolver:
    """
    Внешний решатель, запускаемый отдельным процессом на каждый запрос
    """

    name = "external"

    def __init__(self, command: Union[str, Sequence[str]], budget: Optional[SolverBudget] = None):
        """
        Args:
            command: Командная строка решателя, например "z3 -in"
            budget: Ограничение времени на запрос
        """
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.command:
            raise ExternalSolverError("Не задана команда внешнего решателя")
        self.budget = budget or SolverBudget()

    def solve(self, query: InversionQuery, seed: bytes,
              budget: Optional[SolverBudget] = None) -> Verdict:
        budget = budget or self.budget
        script = export_smt(query)
        start = time.monotonic()
        try:
            completed = subprocess.run(
                self.command,
                input=script,
                capture_output=True,
                text=True,
                timeout=budget.time_limit,
            )
        except subprocess.TimeoutExpired:
            logger.debug(f"Внешний решатель не уложился в {budget.time_limit} с")
            return Verdict(SolverStatus.TIMEOUT, elapsed=time.monotonic() - start, backend=self.name)
        except OSError as e:
            raise ExternalSolverError(f"Не удалось запустить внешний решатель: {e}") from e

        elapsed = time.monotonic() - start
        try:
            status, bindings = parse_solver_output(completed.stdout)
        except ExternalSolverError:
            if completed.returncode != 0:
                raise ExternalSolverError(
                    f"Внешний решатель завершился с кодом {completed.returncode}: "
                    f"{completed.stderr.strip()}"
                ) from None
            raise

        model = None
        if status is SolverStatus.SAT:
            # Отсутствующие в ответе переменные берутся из seed
            model = {index: bindings.get(index, seed[index]) for index in sorted(query.variables)}
        return Verdict(status, model, candidates_tried=0, elapsed=elapsed, backend=self.name)
