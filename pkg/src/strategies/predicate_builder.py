"""
Построение предикатов инвертирования: срез, оптимистичный и сильный
оптимистичный
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from loguru import logger

from ..symbolic.concolic_engine import PathPredicate
from ..symbolic.expressions import SymExpr, negate


class QueryKind(Enum):
    """Виды запросов инвертирования"""
    SLICED = "sliced"
    OPTIMISTIC = "optimistic"
    STRONG_OPTIMISTIC = "strong_optimistic"


@dataclass(frozen=True)
class InversionQuery:
    """
    Запрос инвертирования ветвления

    conjuncts: сохраненные ограничения в исходном порядке, последним идет
    отрицание целевого. included_seqs: номера сохраненных ограничений без
    целевого.
    """
    kind: QueryKind
    target_seq: int
    conjuncts: Tuple[SymExpr, ...]
    included_seqs: Tuple[int, ...] = ()
    source_predicate: Optional[PathPredicate] = field(default=None, compare=False, repr=False)

    @property
    def negated_target(self) -> SymExpr:
        return self.conjuncts[-1]

    @property
    def variables(self) -> frozenset:
        result = frozenset()
        for expr in self.conjuncts:
            result |= expr.variables
        return result

    def same_conjuncts(self, other: "InversionQuery") -> bool:
        return self.conjuncts == other.conjuncts

    def dump(self) -> str:
        """Строка вида `kind; target; [s,...,NEG]`"""
        items = [str(seq) for seq in self.included_seqs] + ["NEG"]
        return f"{self.kind.value}; {self.target_seq}; [{','.join(items)}]"


def _check_target(predicate: PathPredicate, target_seq: int):
    if not 0 <= target_seq < len(predicate):
        raise IndexError(
            f"Номер целевого ветвления {target_seq} вне диапазона 0..{len(predicate) - 1}"
        )


def _query(kind: QueryKind, predicate: PathPredicate, target_seq: int,
           seqs: List[int]) -> InversionQuery:
    seqs = sorted(seqs)
    conjuncts = tuple(predicate[seq].expr for seq in seqs)
    conjuncts += (negate(predicate[target_seq].expr),)
    return InversionQuery(kind, target_seq, conjuncts, tuple(seqs), predicate)


def slice_predicate(predicate: PathPredicate, target_seq: int) -> InversionQuery:
    """
    Срез предиката пути относительно целевого ветвления

    Переменные связаны, если встречаются в одном ограничении с номером не
    больше целевого. Сохраняются предшествующие ограничения, пересекающиеся
    с транзитивным замыканием переменных цели.
    """
    _check_target(predicate, target_seq)
    scope = predicate.constraints[:target_seq + 1]
    closure = set(predicate[target_seq].variables)

    changed = True
    while changed:
        changed = False
        for constraint in scope:
            variables = constraint.variables
            if variables & closure and not variables <= closure:
                closure |= variables
                changed = True

    kept = [c.seq for c in scope[:-1] if c.variables & closure]
    query = _query(QueryKind.SLICED, predicate, target_seq, kept)
    logger.debug(f"Срез для ветвления {target_seq}: {query.dump()}")
    return query


def build_optimistic(predicate: PathPredicate, target_seq: int) -> InversionQuery:
    """Только отрицание целевого ограничения"""
    _check_target(predicate, target_seq)
    return _query(QueryKind.OPTIMISTIC, predicate, target_seq, [])


class SoptDecision(Enum):
    """Решение по ограничению на шаге обратного прохода"""
    INITIAL = "initial"
    NOT_PREFIX = "not_prefix"
    NESTED = "nested"
    CTI = "cti"
    EXCLUDED = "excluded"

    @property
    def included(self) -> bool:
        return self in (SoptDecision.NESTED, SoptDecision.CTI)


@dataclass(frozen=True)
class SoptStep:
    """Состояние после обработки одного ограничения"""
    iteration: int
    point: int
    call_sites: Tuple[int, ...]
    constraint_seq: int
    decision: SoptDecision


def trace_strong_optimistic(predicate: PathPredicate, sliced: InversionQuery,
                            target_seq: int) -> Tuple[InversionQuery, Tuple[SoptStep, ...]]:
    """
    Сильный оптимистичный предикат с журналом итераций

    Обратный проход по ограничениям среза. Ограничение со стеком, не
    являющимся префиксом текущего cs, пропускается. При строгом префиксе
    point переходит на адрес вызова первого отличающегося кадра, а cs
    укорачивается. Ограничение включается, если src <= point < dst или в
    его области есть команда передачи управления.

    Returns:
        Запрос и шаги, начиная с инициализации
    """
    _check_target(predicate, target_seq)
    if sliced.target_seq != target_seq:
        raise ValueError("Срез построен для другого целевого ветвления")

    target = predicate[target_seq]
    point = target.src_addr
    cs = target.stack
    steps = [SoptStep(0, point, cs.call_sites, target_seq, SoptDecision.INITIAL)]
    included: List[int] = []

    for iteration, seq in enumerate(reversed(sliced.included_seqs), start=1):
        constraint = predicate[seq]
        stack = constraint.stack

        if not stack.is_prefix_of(cs):
            decision = SoptDecision.NOT_PREFIX
        else:
            if len(stack) < len(cs):
                point = cs.frames[len(stack)].call_site
                cs = stack
            if constraint.src_addr <= point < constraint.dst_addr:
                decision = SoptDecision.NESTED
            elif constraint.has_cti:
                decision = SoptDecision.CTI
            else:
                decision = SoptDecision.EXCLUDED

        if decision.included:
            included.append(seq)
        steps.append(SoptStep(iteration, point, cs.call_sites, seq, decision))

    query = _query(QueryKind.STRONG_OPTIMISTIC, predicate, target_seq, included)
    logger.debug(f"Сильный оптимистичный для ветвления {target_seq}: {query.dump()}")
    return query, tuple(steps)


def build_strong_optimistic(predicate: PathPredicate, sliced: InversionQuery,
                            target_seq: int) -> InversionQuery:
    query, _ = trace_strong_optimistic(predicate, sliced, target_seq)
    return query


def format_sopt_steps(steps: Tuple[SoptStep, ...]) -> str:
    lines = []
    for step in steps:
        sites = ",".join(str(site) for site in step.call_sites)
        lines.append(
            f"{step.iteration}; point={step.point}; cs=[{sites}]; "
            f"c={step.constraint_seq}; {step.decision.value}"
        )
    return "\n".join(lines) + "\n"
