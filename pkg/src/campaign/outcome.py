"""
Результаты инвертирования отдельных ветвлений
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict

from ..solver.verdict import Verdict
from ..strategies.predicate_builder import InversionQuery, QueryKind


class Correctness(Enum):
    """Результат проверки сгенерированного входа"""
    CORRECT = "correct"
    INCORRECT = "incorrect"
    NOT_REACHED = "not_reached"


@dataclass(frozen=True)
class TargetRef:
    """Целевое ветвление: адрес, номер исполнения и место в предикате"""
    src_addr: int
    occurrence: int
    seq: int
    taken: bool = False


@dataclass(frozen=True)
class GeneratedInput:
    """Вход из корпуса, помеченный целью и видом запроса"""
    target: TargetRef
    kind: QueryKind
    data: bytes

    @property
    def file_name(self) -> str:
        return f"{self.target.src_addr}_{self.target.occurrence}_{self.kind.value}.bin"


@dataclass
class InversionOutcome:
    """
    Итог инвертирования одного ветвления

    Несколько SAT по разным стратегиям считаются одним ветвлением.
    """
    target: TargetRef
    queries: Dict[QueryKind, InversionQuery] = field(default_factory=dict)
    verdicts: Dict[QueryKind, Verdict] = field(default_factory=dict)
    inputs: Dict[QueryKind, bytes] = field(default_factory=dict)
    correctness: Dict[QueryKind, Correctness] = field(default_factory=dict)
    errors: Dict[QueryKind, str] = field(default_factory=dict)
    # Вид запроса -> вид, чей вердикт взят без повторного решения
    reused: Dict[QueryKind, QueryKind] = field(default_factory=dict)
    strong_matches_optimistic: bool = False

    @property
    def solver_calls(self) -> int:
        return len(self.verdicts) - len(self.reused)

    @property
    def counted_sat(self) -> int:
        return int(any(verdict.is_sat for verdict in self.verdicts.values()))

    @property
    def counted_correct(self) -> int:
        return int(any(value is Correctness.CORRECT for value in self.correctness.values()))

    def generated(self):
        return [GeneratedInput(self.target, kind, data) for kind, data in self.inputs.items()]
