"""
Свойства на случайных программах: согласованность трасс и стеков вызовов,
вложенность запросов, точность решателя, соответствие схеме стратегий и
повторная проверка сгенерированных входов
"""

import numpy as np
from hypothesis import HealthCheck, given, settings

from conftest import RANDOM_HELPER, random_programs
from src.campaign.campaign_harness import CampaignHarness, LogicalClock, StrategyConfig
from src.campaign.outcome import Correctness
from src.solver.brute_force import solve
from src.solver.verdict import SolverStatus
from src.strategies.flowchart import StrategyMode
from src.strategies.predicate_builder import (
    QueryKind, SoptDecision, build_optimistic, build_strong_optimistic, slice_predicate,
    trace_strong_optimistic,
)
from src.symbolic.concolic_engine import ENTRY_CALL_SITE, run_concolic, scan_cti
from src.symbolic.expressions import evaluate, holds_on
from src.vm.interpreter import Termination, run_concrete
from src.vm.isa import Opcode

PROPERTY_SETTINGS = settings(
    max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow],
)


@PROPERTY_SETTINGS
@given(case=random_programs())
def test_predicate_agrees_with_concrete_path(case):
    program, seed = case
    predicate = run_concolic(program, seed)
    trace = run_concrete(program, seed)

    assert trace.terminated is Termination.HALT
    assert len(program) <= 30
    assert holds_on(predicate.exprs, seed)
    events = {(e.src, e.occurrence): e.taken for e in trace.branch_events}
    for constraint in predicate.constraints:
        assert events[(constraint.src_addr, constraint.occurrence)] == constraint.taken
        assert constraint.variables
        assert constraint.has_cti == scan_cti(program, constraint.src_addr, constraint.dst_addr)


@PROPERTY_SETTINGS
@given(case=random_programs())
def test_call_stack_snapshots(case):
    program, seed = case
    predicate = run_concolic(program, seed)
    helper = program.labels.get(RANDOM_HELPER)

    for constraint in predicate.constraints:
        frames = constraint.stack.frames
        assert frames[0].call_site == ENTRY_CALL_SITE
        assert frames[0].callee_entry == program.entry
        for depth, frame in enumerate(frames[1:], start=1):
            call = program[frame.call_site]
            assert call.opcode is Opcode.CALL
            assert call.target == frame.callee_entry
            assert frame.depth == depth
        # helper лежит после halt и сам никого не вызывает
        inside_helper = helper is not None and constraint.src_addr >= helper
        assert len(frames) == (2 if inside_helper else 1)


@PROPERTY_SETTINGS
@given(case=random_programs())
def test_queries_form_a_subset_chain(case):
    program, seed = case
    predicate = run_concolic(program, seed)

    for seq in range(len(predicate)):
        sliced = slice_predicate(predicate, seq)
        strong, steps = trace_strong_optimistic(predicate, sliced, seq)
        optimistic = build_optimistic(predicate, seq)

        assert optimistic.included_seqs == ()
        assert set(strong.included_seqs) <= set(sliced.included_seqs)
        assert all(s < seq for s in sliced.included_seqs)
        assert len(steps) == len(sliced.included_seqs) + 1
        assert sliced.negated_target == optimistic.negated_target == strong.negated_target


@PROPERTY_SETTINGS
@given(case=random_programs())
def test_strong_optimistic_sweep_follows_call_stacks(case):
    program, seed = case
    predicate = run_concolic(program, seed)

    for seq in range(len(predicate)):
        _, steps = trace_strong_optimistic(predicate, slice_predicate(predicate, seq), seq)
        assert steps[0].decision is SoptDecision.INITIAL
        assert steps[0].call_sites == predicate[seq].stack.call_sites

        for previous, step in zip(steps, steps[1:]):
            constraint = predicate[step.constraint_seq]
            sites = constraint.stack.call_sites
            if step.decision is SoptDecision.NOT_PREFIX:
                assert sites != previous.call_sites[:len(sites)]
                assert (step.point, step.call_sites) == (previous.point, previous.call_sites)
                continue
            # Префикс: cs укорачивается до стека ограничения
            assert step.call_sites == sites
            nested = constraint.src_addr <= step.point < constraint.dst_addr
            if step.decision is SoptDecision.NESTED:
                assert nested
            elif step.decision is SoptDecision.CTI:
                assert not nested and constraint.has_cti
            else:
                assert not nested and not constraint.has_cti


def _satisfiable_anywhere(conjuncts, width: int) -> bool:
    """Проверка по полной сетке всех входов, без порядка перебора"""
    values = np.arange(256, dtype=np.uint32)
    grids = np.meshgrid(*([values] * width), indexing="ij")
    env = dict(enumerate(grids))
    mask = np.ones(grids[0].shape, dtype=bool)
    for expr in conjuncts:
        mask &= np.broadcast_to(evaluate(expr, env), mask.shape)
    return bool(mask.any())


@PROPERTY_SETTINGS
@given(case=random_programs())
def test_brute_force_is_exact_for_every_query(case):
    program, seed = case
    predicate = run_concolic(program, seed)

    for seq in range(len(predicate)):
        sliced = slice_predicate(predicate, seq)
        queries = (
            sliced,
            build_optimistic(predicate, seq),
            build_strong_optimistic(predicate, sliced, seq),
        )
        for query in queries:
            verdict = solve(query, seed)
            if verdict.is_sat:
                assert set(verdict.model) == set(query.variables)
                assert holds_on(query.conjuncts, seed, verdict.model)
            else:
                assert verdict.status is SolverStatus.UNSAT
                assert not _satisfiable_anywhere(query.conjuncts, len(seed))


@PROPERTY_SETTINGS
@given(case=random_programs())
def test_campaign_follows_strategy_flowchart(case):
    program, seed = case
    harness = CampaignHarness(program, clock=LogicalClock())
    report = harness.invert_all(seed, StrategyConfig(mode=StrategyMode.OPT_PLUS_SOPT))

    for outcome in report.outcomes:
        verdicts = outcome.verdicts
        saved = set(outcome.inputs)
        if verdicts[QueryKind.SLICED].is_sat:
            assert set(verdicts) == {QueryKind.SLICED}
            assert saved == {QueryKind.SLICED}
            # В программах без обратных переходов вход по срезу всегда инвертирует цель
            assert outcome.correctness[QueryKind.SLICED] is Correctness.CORRECT
            continue

        assert QueryKind.OPTIMISTIC in verdicts
        if not verdicts[QueryKind.OPTIMISTIC].is_sat:
            assert saved == set()
            assert QueryKind.STRONG_OPTIMISTIC not in verdicts
        elif outcome.strong_matches_optimistic:
            assert saved == {QueryKind.OPTIMISTIC}
            assert QueryKind.STRONG_OPTIMISTIC not in verdicts
        elif verdicts[QueryKind.STRONG_OPTIMISTIC].is_sat:
            assert saved == {QueryKind.OPTIMISTIC, QueryKind.STRONG_OPTIMISTIC}
        else:
            assert saved == {QueryKind.OPTIMISTIC}

    assert report.correct_branches <= report.sat_branches <= report.metrics.targets
    assert report.coverage_with_generated >= report.coverage_base


@PROPERTY_SETTINGS
@given(case=random_programs())
def test_generated_inputs_replay_consistently(case):
    program, seed = case
    predicate = run_concolic(program, seed)
    report = CampaignHarness(program, clock=LogicalClock()).invert_all(
        seed, StrategyConfig(mode=StrategyMode.OPT_PLUS_SOPT),
    )

    for outcome in report.outcomes:
        target = outcome.target
        for kind, data in outcome.inputs.items():
            event = run_concrete(program, data).find_event(target.src_addr, target.occurrence)
            verdict = outcome.correctness[kind]
            if verdict is Correctness.NOT_REACHED:
                assert event is None
                continue
            assert event is not None
            assert (event.taken != target.taken) == (verdict is Correctness.CORRECT)

        if QueryKind.SLICED not in outcome.inputs:
            continue
        # Вход по срезу, взятый как новый seed, повторяет префикс пути и переворачивает цель
        replay = run_concolic(program, outcome.inputs[QueryKind.SLICED])
        assert replay.exprs[:target.seq] == predicate.exprs[:target.seq]
        flipped = replay[target.seq]
        assert (flipped.src_addr, flipped.occurrence) == (target.src_addr, target.occurrence)
        assert flipped.taken != target.taken
