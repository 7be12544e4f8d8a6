"""
Кампания инвертирования ветвлений

Один конколический запуск, затем все символьные ветвления по порядку
проходят схему стратегий; сгенерированные входы проверяются повторным
конкретным исполнением.
"""

import asyncio
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

from loguru import logger

from ..solver.smt_export import export_smt
from ..solver.solver_manager import SolverManager
from ..solver.verdict import SolverStatus, Verdict, merge_model
from ..strategies.flowchart import StrategyMode, plan_queries
from ..strategies.predicate_builder import QueryKind, slice_predicate
from ..symbolic.concolic_engine import PathPredicate, run_concolic
from ..vm.interpreter import DEFAULT_STEP_LIMIT, edge_coverage, run_concrete
from ..vm.isa import Program
from .metrics import MetricsSummary, summarize
from .outcome import Correctness, GeneratedInput, InversionOutcome, TargetRef

Clock = Callable[[], float]

ROW_LABELS = {
    StrategyMode.DEFAULT: "Base",
    StrategyMode.OPT_ONLY: "Opt",
    StrategyMode.OPT_PLUS_SOPT: "Sopt",
    StrategyMode.SOPT_ONLY: "SoptOnly",
}


class ValidationMode(Enum):
    """Правило сопоставления целевого ветвления при проверке"""
    STRICT = "strict"
    LOOSE = "loose"


class LogicalClock:
    """Часы-счетчик: каждый вызов продвигает время на tick секунд"""

    def __init__(self, tick: float = 1.0):
        self.tick = tick
        self._now = 0.0

    def __call__(self) -> float:
        self._now += self.tick
        return self._now


@dataclass(frozen=True)
class StrategyConfig:
    """Конфигурация запуска кампании"""
    mode: StrategyMode = StrategyMode.OPT_PLUS_SOPT
    solver_timeout: float = 10.0
    max_branches: Optional[int] = None
    time_budget: Optional[float] = None
    validate_mode: ValidationMode = ValidationMode.STRICT
    jobs: int = 1
    step_limit: int = DEFAULT_STEP_LIMIT
    smt_dump_dir: Optional[Path] = None

    @property
    def label(self) -> str:
        return ROW_LABELS[self.mode]


@dataclass
class CampaignReport:
    """Отчет кампании вместе с корпусом сгенерированных входов"""
    mode: StrategyMode
    metrics: MetricsSummary
    coverage_base: int
    coverage_with_generated: int
    outcomes: Tuple[InversionOutcome, ...] = ()
    corpus: Tuple[GeneratedInput, ...] = ()
    predicate: Optional[PathPredicate] = field(default=None, repr=False)

    @property
    def correct_branches(self) -> int:
        return self.metrics.correct_branches

    @property
    def sat_branches(self) -> int:
        return self.metrics.sat_branches

    @property
    def accuracy(self) -> float:
        return self.metrics.accuracy

    @property
    def speed(self) -> float:
        return self.metrics.speed


@dataclass(frozen=True)
class CoverageRow:
    label: str
    mode: StrategyMode
    coverage: int
    correct: int
    sat: int
    # Прирост относительно предыдущей строки, %
    growth: Optional[float] = None


def validate(program: Program, original_predicate: PathPredicate, target: TargetRef,
             candidate: bytes, mode: ValidationMode = ValidationMode.STRICT,
             step_limit: int = DEFAULT_STEP_LIMIT) -> Correctness:
    """
    Проверка сгенерированного входа повторным исполнением

    strict: ищется исполнение (src, occurrence) цели; loose: достаточно
    любого исполнения src в обратном направлении. Сбой или лимит шагов до
    нужного исполнения дают not_reached.
    """
    original = original_predicate[target.seq].taken
    trace = run_concrete(program, candidate, step_limit)

    if mode is ValidationMode.STRICT:
        event = trace.find_event(target.src_addr, target.occurrence)
        if event is None:
            return Correctness.NOT_REACHED
        return Correctness.CORRECT if event.taken != original else Correctness.INCORRECT

    events = trace.events_at(target.src_addr)
    if not events:
        return Correctness.NOT_REACHED
    if any(event.taken != original for event in events):
        return Correctness.CORRECT
    return Correctness.INCORRECT


class CampaignHarness:
    """
    Исполнитель кампаний для одной программы
    """

    def __init__(self, program: Program, solver: Optional[SolverManager] = None,
                 clock: Clock = time.monotonic):
        """
        Args:
            program: Анализируемая программа
            solver: Менеджер решателей; по умолчанию перебор с настройками по умолчанию
            clock: Источник времени для бюджета и метрики Speed
        """
        self.program = program
        self.solver = solver or SolverManager()
        self.clock = clock

    def invert_target(self, predicate: PathPredicate, target_seq: int,
                      config: StrategyConfig) -> InversionOutcome:
        """Прогон схемы стратегий для одного ветвления без проверки входов"""
        constraint = predicate[target_seq]
        outcome = InversionOutcome(TargetRef(
            constraint.src_addr, constraint.occurrence, target_seq, constraint.taken,
        ))

        sliced = slice_predicate(predicate, target_seq)
        sliced_verdict = self._solve(outcome, sliced, predicate.seed, config)
        plan = plan_queries(predicate, target_seq, sliced_verdict.status,
                            mode=config.mode, sliced=sliced)
        while not plan.complete:
            self._solve(outcome, plan.pending, predicate.seed, config)
            plan = plan_queries(
                predicate, target_seq, sliced_verdict.status,
                optimistic_verdict=self._status(outcome, QueryKind.OPTIMISTIC),
                strong_verdict=self._status(outcome, QueryKind.STRONG_OPTIMISTIC),
                mode=config.mode,
                sliced=sliced,
            )

        outcome.strong_matches_optimistic = plan.strong_matches_optimistic
        for kind in plan.save:
            outcome.inputs[kind] = merge_model(outcome.verdicts[kind].model, predicate.seed)

        logger.debug(
            f"Ветвление {target_seq} (адрес {constraint.src_addr}): "
            f"{', '.join(f'{k.value}={v.status.value}' for k, v in outcome.verdicts.items())}; "
            f"сохранено: {[kind.value for kind in plan.save]}"
        )
        return outcome

    @staticmethod
    def _status(outcome: InversionOutcome, kind: QueryKind) -> Optional[SolverStatus]:
        verdict = outcome.verdicts.get(kind)
        return verdict.status if verdict else None

    def _solve(self, outcome: InversionOutcome, query, seed: bytes,
               config: StrategyConfig) -> Verdict:
        previous = self._answered_with_same_conjuncts(outcome, query)
        outcome.queries[query.kind] = query
        if previous is not None:
            logger.debug(
                f"Ветвление {query.target_seq}: {query.kind.value} совпадает с {previous.value}, "
                f"вердикт взят без повторного решения"
            )
            outcome.reused[query.kind] = previous
            if previous in outcome.errors:
                outcome.errors[query.kind] = outcome.errors[previous]
            outcome.verdicts[query.kind] = outcome.verdicts[previous]
            return outcome.verdicts[query.kind]

        if config.smt_dump_dir is not None:
            self._dump_smt(outcome.target, query, config.smt_dump_dir)
        try:
            verdict = self.solver.solve(query, seed, config.solver_timeout)
        except ValueError as e:
            logger.warning(f"Ошибка решателя для ветвления {query.target_seq} ({query.kind.value}): {e}")
            outcome.errors[query.kind] = str(e)
            verdict = Verdict(SolverStatus.TIMEOUT, backend="error")
        outcome.verdicts[query.kind] = verdict
        return verdict

    @staticmethod
    def _answered_with_same_conjuncts(outcome: InversionOutcome, query) -> Optional[QueryKind]:
        for kind in outcome.verdicts:
            if kind is not query.kind and outcome.queries[kind].same_conjuncts(query):
                return kind
        return None

    @staticmethod
    def _dump_smt(target: TargetRef, query, directory: Path):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{target.src_addr}_{target.occurrence}_{query.kind.value}.smt2"
        path.write_text(export_smt(query), encoding="utf-8")

    def validate_outcome(self, predicate: PathPredicate, outcome: InversionOutcome,
                          config: StrategyConfig):
        for kind, data in outcome.inputs.items():
            outcome.correctness[kind] = validate(
                self.program, predicate, outcome.target, data,
                config.validate_mode, config.step_limit,
            )

    def _targets(self, predicate: PathPredicate, config: StrategyConfig) -> List[int]:
        seqs = list(range(len(predicate)))
        if config.max_branches is not None:
            seqs = seqs[:config.max_branches]
        return seqs

    def _budget_exhausted(self, start: float, config: StrategyConfig) -> bool:
        return config.time_budget is not None and self.clock() - start >= config.time_budget

    def _invert_sequential(self, predicate, seqs, config, start) -> List[InversionOutcome]:
        outcomes = []
        for seq in seqs:
            if self._budget_exhausted(start, config):
                logger.info(f"Бюджет времени исчерпан, обработано ветвлений: {len(outcomes)}")
                break
            outcomes.append(self.invert_target(predicate, seq, config))
        return outcomes

    async def _invert_concurrent(self, predicate, seqs, config, start) -> List[InversionOutcome]:
        loop = asyncio.get_running_loop()

        def job(seq: int) -> Optional[InversionOutcome]:
            if self._budget_exhausted(start, config):
                return None
            return self.invert_target(predicate, seq, config)

        with ThreadPoolExecutor(max_workers=config.jobs) as executor:
            tasks = [loop.run_in_executor(executor, job, seq) for seq in seqs]
            results = await asyncio.gather(*tasks)
        outcomes = [outcome for outcome in results if outcome is not None]
        outcomes.sort(key=lambda o: o.target.seq)
        return outcomes

    def invert_all(self, seed: bytes, config: StrategyConfig) -> CampaignReport:
        """
        Инвертирование всех символьных ветвлений в прямом порядке

        Args:
            seed: Начальный вход
            config: Конфигурация стратегии

        Returns:
            CampaignReport с корпусом сгенерированных входов
        """
        predicate = run_concolic(self.program, seed, config.step_limit)
        seqs = self._targets(predicate, config)
        logger.info(
            f"Кампания {config.mode.value}: целевых ветвлений {len(seqs)} из {len(predicate)}"
        )

        start = self.clock()
        if config.jobs > 1:
            outcomes = asyncio.run(self._invert_concurrent(predicate, seqs, config, start))
        else:
            outcomes = self._invert_sequential(predicate, seqs, config, start)
        for outcome in outcomes:
            self.validate_outcome(predicate, outcome, config)
        elapsed = self.clock() - start

        corpus = tuple(item for outcome in outcomes for item in outcome.generated())
        seed_only = [bytes(seed)]
        report = CampaignReport(
            mode=config.mode,
            metrics=summarize(outcomes, elapsed),
            coverage_base=edge_coverage(self.program, seed_only, config.step_limit),
            coverage_with_generated=edge_coverage(
                self.program, seed_only + [item.data for item in corpus], config.step_limit,
            ),
            outcomes=tuple(outcomes),
            corpus=corpus,
            predicate=predicate,
        )
        logger.info(
            f"Кампания {config.mode.value} завершена: correct={report.correct_branches}, "
            f"sat={report.sat_branches}, входов в корпусе: {len(corpus)}"
        )
        return report

    def compare_configs(self, seed: bytes, configs: Sequence[StrategyConfig]) -> List[CoverageRow]:
        """
        Покрытие корпусов разных конфигураций

        Прирост каждой строки считается относительно предыдущей, что дает
        столбцы Opt / Base и Sopt / Opt.
        """
        rows: List[CoverageRow] = []
        for config in configs:
            report = self.invert_all(seed, config)
            growth = None
            if rows:
                previous = rows[-1].coverage
                growth = (report.coverage_with_generated - previous) / previous * 100.0 if previous else 0.0
            rows.append(CoverageRow(
                label=config.label,
                mode=config.mode,
                coverage=report.coverage_with_generated,
                correct=report.correct_branches,
                sat=report.sat_branches,
                growth=growth,
            ))
        return rows


def default_comparison(base: StrategyConfig) -> List[StrategyConfig]:
    """Три сравниваемых запуска: Base, Opt, Sopt"""
    return [replace(base, mode=mode) for mode in
            (StrategyMode.DEFAULT, StrategyMode.OPT_ONLY, StrategyMode.OPT_PLUS_SOPT)]


def invert_all(program: Program, seed: bytes, config: StrategyConfig,
               solver: Optional[SolverManager] = None,
               clock: Clock = time.monotonic) -> CampaignReport:
    return CampaignHarness(program, solver, clock).invert_all(seed, config)


def compare_configs(program: Program, seed: bytes, configs: Sequence[StrategyConfig],
                    solver: Optional[SolverManager] = None,
                    clock: Clock = time.monotonic) -> List[CoverageRow]:
    return CampaignHarness(program, solver, clock).compare_configs(seed, configs)
