"""
Схема выбора запросов для инвертирования одного ветвления

plan_queries работает как шаговая функция: по уже известным вердиктам
возвращает следующий запрос к решателю либо итоговый набор сохраняемых
входов.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from ..solver.verdict import SolverStatus
from ..symbolic.concolic_engine import PathPredicate
from .predicate_builder import (
    InversionQuery, QueryKind, build_optimistic, build_strong_optimistic, slice_predicate,
)


class StrategyMode(Enum):
    """Режимы сравниваемых запусков"""
    DEFAULT = "default"
    OPT_ONLY = "opt"
    SOPT_ONLY = "sopt"
    OPT_PLUS_SOPT = "opt+sopt"


@dataclass(frozen=True)
class StrategyPlan:
    """
    Шаг плана

    pending: запрос, который нужно отправить решателю; None, когда план
    завершен и save перечисляет виды сохраняемых решений.
    """
    pending: Optional[InversionQuery] = None
    save: Tuple[QueryKind, ...] = ()
    strong_matches_optimistic: bool = False

    @property
    def complete(self) -> bool:
        return self.pending is None


def plan_queries(predicate: PathPredicate, target_seq: int,
                 sliced_verdict: SolverStatus,
                 optimistic_verdict: Optional[SolverStatus] = None,
                 strong_verdict: Optional[SolverStatus] = None,
                 mode: StrategyMode = StrategyMode.OPT_PLUS_SOPT,
                 sliced: Optional[InversionQuery] = None) -> StrategyPlan:
    """
    Следующий шаг схемы для целевого ветвления

    TIMEOUT трактуется как «не SAT». Одинаковые оптимистичный и сильный
    оптимистичный предикаты не отправляются решателю дважды.

    Args:
        predicate: Предикат пути
        target_seq: Номер целевого ограничения
        sliced_verdict: Вердикт по срезу
        optimistic_verdict: Вердикт по оптимистичному запросу, если он был
        strong_verdict: Вердикт по сильному оптимистичному запросу, если он был
        mode: Режим запуска
        sliced: Уже построенный срез, чтобы не строить его повторно
    """
    sat = SolverStatus.SAT
    if sliced_verdict is sat:
        return StrategyPlan(save=(QueryKind.SLICED,))
    if mode is StrategyMode.DEFAULT:
        return StrategyPlan()

    if mode is StrategyMode.SOPT_ONLY:
        sliced = sliced or slice_predicate(predicate, target_seq)
        strong = build_strong_optimistic(predicate, sliced, target_seq)
        matches = strong.same_conjuncts(build_optimistic(predicate, target_seq))
        if strong_verdict is None:
            return StrategyPlan(pending=strong, strong_matches_optimistic=matches)
        save = (QueryKind.STRONG_OPTIMISTIC,) if strong_verdict is sat else ()
        return StrategyPlan(save=save, strong_matches_optimistic=matches)

    optimistic = build_optimistic(predicate, target_seq)
    if optimistic_verdict is None:
        return StrategyPlan(pending=optimistic)
    if optimistic_verdict is not sat:
        return StrategyPlan()
    if mode is StrategyMode.OPT_ONLY:
        return StrategyPlan(save=(QueryKind.OPTIMISTIC,))

    sliced = sliced or slice_predicate(predicate, target_seq)
    strong = build_strong_optimistic(predicate, sliced, target_seq)
    if strong.same_conjuncts(optimistic):
        return StrategyPlan(save=(QueryKind.OPTIMISTIC,), strong_matches_optimistic=True)
    if strong_verdict is None:
        return StrategyPlan(pending=strong)
    if strong_verdict is sat:
        return StrategyPlan(save=(QueryKind.OPTIMISTIC, QueryKind.STRONG_OPTIMISTIC))
    return StrategyPlan(save=(QueryKind.OPTIMISTIC,))
