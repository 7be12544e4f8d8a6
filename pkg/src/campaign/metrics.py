"""
Метрики кампании: Correct, Accuracy, Speed и разбивка по стратегиям
"""

from dataclasses import dataclass
from typing import Iterable, Tuple

from ..strategies.predicate_builder import QueryKind
from .outcome import Correctness, InversionOutcome


def accuracy(correct: int, sat: int) -> float:
    """Доля корректных среди SAT; 0 при отсутствии SAT"""
    return correct / sat if sat else 0.0


def speed(correct: int, elapsed_seconds: float) -> float:
    """Корректных ветвлений в минуту"""
    return correct / (elapsed_seconds / 60.0) if elapsed_seconds > 0 else 0.0


@dataclass(frozen=True)
class StrategyBreakdown:
    """Счетчики по одному виду запросов"""
    kind: QueryKind
    queries: int = 0
    sat: int = 0
    saved: int = 0
    correct: int = 0
    incorrect: int = 0
    not_reached: int = 0
    errors: int = 0


@dataclass(frozen=True)
class MetricsSummary:
    """Сводка метрик кампании"""
    targets: int
    correct_branches: int
    sat_branches: int
    accuracy: float
    speed: float
    elapsed: float
    correct_sites: int
    sat_sites: int
    solver_calls: int
    breakdown: Tuple[StrategyBreakdown, ...]


def _breakdown(kind: QueryKind, outcomes) -> StrategyBreakdown:
    results = [o.correctness.get(kind) for o in outcomes if kind in o.inputs]
    return StrategyBreakdown(
        kind=kind,
        queries=sum(1 for o in outcomes if kind in o.verdicts),
        sat=sum(1 for o in outcomes if kind in o.verdicts and o.verdicts[kind].is_sat),
        saved=len(results),
        correct=results.count(Correctness.CORRECT),
        incorrect=results.count(Correctness.INCORRECT),
        not_reached=results.count(Correctness.NOT_REACHED),
        errors=sum(1 for o in outcomes if kind in o.errors),
    )


def summarize(outcomes: Iterable[InversionOutcome], elapsed: float) -> MetricsSummary:
    """
    Агрегация результатов

    Счетчики коммутативны, порядок outcomes не влияет на результат.

    Args:
        outcomes: Результаты по целевым ветвлениям
        elapsed: Время цикла инвертирования в секундах
    """
    outcomes = list(outcomes)
    correct = sum(o.counted_correct for o in outcomes)
    sat = sum(o.counted_sat for o in outcomes)
    return MetricsSummary(
        targets=len(outcomes),
        correct_branches=correct,
        sat_branches=sat,
        accuracy=accuracy(correct, sat),
        speed=speed(correct, elapsed),
        elapsed=elapsed,
        correct_sites=len({o.target.src_addr for o in outcomes if o.counted_correct}),
        sat_sites=len({o.target.src_addr for o in outcomes if o.counted_sat}),
        solver_calls=sum(o.solver_calls for o in outcomes),
        breakdown=tuple(_breakdown(kind, outcomes) for kind in QueryKind),
    )
