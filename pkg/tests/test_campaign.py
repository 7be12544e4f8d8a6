"""
Тесты кампании инвертирования, валидации и отчетов
"""

from dataclasses import replace

import pytest

from conftest import LONG_LOOP_SOURCE
from src.campaign.campaign_harness import (
    CampaignHarness, LogicalClock, StrategyConfig, ValidationMode, compare_configs,
    default_comparison, invert_all, validate,
)
from src.campaign.outcome import Correctness, TargetRef
from src.campaign.report import (
    COVERAGE_HEADER, CSV_HEADER, format_coverage_table, format_csv, format_outcome,
    format_report, write_corpus, write_report,
)
from src.solver.solver_manager import SolverManager
from src.solver.verdict import SolverStatus
from src.strategies.flowchart import StrategyMode
from src.strategies.predicate_builder import QueryKind
from src.symbolic.concolic_engine import run_concolic
from src.vm.assembler import assemble

SOPT = StrategyConfig(mode=StrategyMode.OPT_PLUS_SOPT)


def _mode(mode):
    return StrategyConfig(mode=mode)


@pytest.fixture
def harness(listing1, solver):
    program, _ = listing1
    return CampaignHarness(program, solver, LogicalClock())


def test_listing1_invert_target(harness, listing1_predicate):
    outcome = harness.invert_target(listing1_predicate, 3, SOPT)
    harness.validate_outcome(listing1_predicate, outcome, SOPT)

    assert {kind: v.status for kind, v in outcome.verdicts.items()} == {
        QueryKind.SLICED: SolverStatus.UNSAT,
        QueryKind.OPTIMISTIC: SolverStatus.SAT,
        QueryKind.STRONG_OPTIMISTIC: SolverStatus.SAT,
    }
    assert outcome.inputs[QueryKind.OPTIMISTIC] == bytes([0x35, 0x11, 0x20, 0x36])
    assert outcome.inputs[QueryKind.STRONG_OPTIMISTIC] == bytes([0x35, 0x37, 0x20, 0x36])
    assert outcome.correctness == {
        QueryKind.OPTIMISTIC: Correctness.NOT_REACHED,
        QueryKind.STRONG_OPTIMISTIC: Correctness.CORRECT,
    }
    assert (outcome.counted_sat, outcome.counted_correct) == (1, 1)


@pytest.mark.parametrize("mode, correct, sat", [
    (StrategyMode.DEFAULT, 3, 3),
    (StrategyMode.OPT_ONLY, 3, 4),
    (StrategyMode.OPT_PLUS_SOPT, 4, 4),
    (StrategyMode.SOPT_ONLY, 4, 4),
])
def test_listing1_campaign_modes(harness, listing1, mode, correct, sat):
    _, seed = listing1
    report = harness.invert_all(seed, _mode(mode))

    assert (report.correct_branches, report.sat_branches) == (correct, sat)
    assert report.metrics.targets == 4
    assert report.accuracy == pytest.approx(correct / sat)


def test_sliced_models(harness, listing1):
    _, seed = listing1
    report = harness.invert_all(seed, SOPT)

    models = [o.verdicts[QueryKind.SLICED].model for o in report.outcomes[:3]]
    assert models == [{2: 0x30}, {0: 0x34}, {1: 0x11, 3: 0x11}]
    assert report.metrics.solver_calls == 6
    assert [item.file_name for item in report.corpus] == [
        "5_0_sliced.bin", "8_0_sliced.bin", "12_0_sliced.bin",
        "21_0_optimistic.bin", "21_0_strong_optimistic.bin",
    ]


def test_coverage_comparison(listing1, solver):
    program, seed = listing1
    rows = compare_configs(program, seed, default_comparison(SOPT), solver, LogicalClock())

    assert [row.label for row in rows] == ["Base", "Opt", "Sopt"]
    assert [row.coverage for row in rows] == [26, 26, 29]
    assert rows[0].growth is None
    assert rows[1].growth == 0.0
    assert rows[2].growth == pytest.approx(3 / 26 * 100)

    table = format_coverage_table(rows).splitlines()
    assert table[0] == COVERAGE_HEADER
    assert table[1] == "Base,26,3,3,-"
    assert "Opt / Base=+0.00%" in table
    assert "Sopt / Opt=+11.54%" in table


def test_coverage_baseline(harness, listing1):
    _, seed = listing1
    report = harness.invert_all(seed, _mode(StrategyMode.DEFAULT))
    assert report.coverage_base == 23
    assert report.coverage_with_generated == 26


def test_validation_modes(sample):
    program, seed = sample("loop_sum")
    predicate = run_concolic(program, seed)
    # Последняя итерация цикла: адрес 10, третье исполнение, переход не выполнен
    target = TargetRef(10, 2, 3, False)

    def check(first_byte, mode):
        return validate(program, predicate, target, bytes([first_byte, 2, 6]), mode)

    assert check(5, ValidationMode.STRICT) is Correctness.CORRECT
    assert check(3, ValidationMode.STRICT) is Correctness.INCORRECT
    assert check(1, ValidationMode.STRICT) is Correctness.NOT_REACHED
    assert check(1, ValidationMode.LOOSE) is Correctness.INCORRECT
    assert check(5, ValidationMode.LOOSE) is Correctness.CORRECT
    assert check(0, ValidationMode.LOOSE) is Correctness.NOT_REACHED


def test_loop_campaign(sample, solver):
    program, seed = sample("loop_sum")
    report = invert_all(program, seed, SOPT, solver, LogicalClock())

    assert report.metrics.targets == 5
    last = report.outcomes[4]
    assert last.queries[QueryKind.SLICED].included_seqs == ()
    assert last.verdicts[QueryKind.SLICED].model == {1: 2, 2: 7}
    assert last.correctness[QueryKind.SLICED] is Correctness.CORRECT


def test_branch_budget(harness, listing1):
    _, seed = listing1
    report = harness.invert_all(seed, replace(SOPT, max_branches=2))
    assert [o.target.seq for o in report.outcomes] == [0, 1]


def test_time_budget(harness, listing1):
    _, seed = listing1
    report = harness.invert_all(seed, replace(SOPT, time_budget=2.5))

    assert report.metrics.targets == 2
    assert report.metrics.elapsed == 4.0
    assert report.speed == pytest.approx(30.0)


def test_concurrent_matches_sequential(harness, listing1):
    _, seed = listing1
    sequential = harness.invert_all(seed, SOPT)
    concurrent = harness.invert_all(seed, replace(SOPT, jobs=4))

    assert [o.target for o in concurrent.outcomes] == [o.target for o in sequential.outcomes]
    assert concurrent.corpus == sequential.corpus
    assert (concurrent.correct_branches, concurrent.sat_branches) == (4, 4)


def test_solver_errors_are_recorded(listing1):
    program, seed = listing1
    narrow = SolverManager({"max_bytes": 1})
    report = CampaignHarness(program, narrow, LogicalClock()).invert_all(seed, SOPT)

    assert report.sat_branches == 2
    last = report.outcomes[3]
    assert set(last.errors) == {QueryKind.SLICED, QueryKind.OPTIMISTIC}
    assert last.verdicts[QueryKind.SLICED].backend == "error"
    breakdown = {item.kind: item for item in report.metrics.breakdown}
    assert breakdown[QueryKind.SLICED].errors == 2


def test_smt_dump(harness, listing1, tmp_path):
    _, seed = listing1
    harness.invert_all(seed, replace(SOPT, smt_dump_dir=tmp_path / "smt"))

    names = sorted(path.name for path in (tmp_path / "smt").iterdir())
    assert names == [
        "12_0_sliced.smt2", "21_0_optimistic.smt2", "21_0_sliced.smt2",
        "21_0_strong_optimistic.smt2", "5_0_sliced.smt2", "8_0_sliced.smt2",
    ]
    assert (tmp_path / "smt" / "21_0_optimistic.smt2").read_text(encoding="utf-8").startswith(
        "(set-logic QF_BV)\n"
    )


def test_reports_and_corpus_files(harness, listing1, tmp_path):
    _, seed = listing1
    report = harness.invert_all(seed, SOPT)

    text = format_report(report).splitlines()
    assert "correct=4" in text
    assert "sat=4" in text
    assert "strategy.strong_optimistic.correct=1" in text
    assert "strategy.optimistic.not_reached=1" in text
    assert format_csv([report]).splitlines() == [CSV_HEADER, f"opt+sopt,4,4,1.0000,{report.speed:.4f},29"]

    written = write_corpus(report, tmp_path / "corpus")
    assert len(written) == 5
    assert (tmp_path / "corpus" / "21_0_strong_optimistic.bin").read_bytes() == bytes([0x35, 0x37, 0x20, 0x36])
    assert [path.name for path in write_report(report, tmp_path)] == ["report.txt", "report.csv"]

    details = format_outcome(report.outcomes[3])
    assert "query=strong_optimistic; 3; [2,NEG]" in details
    assert "strong_optimistic.model={0:0x35,1:0x37,3:0x36}" in details
    assert "optimistic.validation=not_reached" in details


def test_long_loop_over_symbolic_value(solver):
    program = assemble(LONG_LOOP_SOURCE)
    assert len(run_concolic(program, b"\x01")) == 1

    report = CampaignHarness(program, solver, LogicalClock()).invert_all(b"\x01", SOPT)

    outcome = report.outcomes[0]
    assert outcome.verdicts[QueryKind.SLICED].model == {0: 8}
    assert outcome.correctness[QueryKind.SLICED] is Correctness.CORRECT
    assert (report.correct_branches, report.sat_branches) == (1, 1)


UNSAT_ALONE_SOURCE = """\
.input 1
main:
    input r0, 0
    const r1, 0x100
    jlt r0, r1, done
    const r2, 1
done:
    halt
"""


def test_identical_query_is_not_solved_twice(solver, tmp_path):
    program = assemble(UNSAT_ALONE_SOURCE)
    config = replace(SOPT, smt_dump_dir=tmp_path / "smt")
    report = CampaignHarness(program, solver, LogicalClock()).invert_all(b"\x10", config)

    outcome = report.outcomes[0]
    assert outcome.queries[QueryKind.SLICED].included_seqs == ()
    assert outcome.reused == {QueryKind.OPTIMISTIC: QueryKind.SLICED}
    assert outcome.verdicts[QueryKind.OPTIMISTIC].status is SolverStatus.UNSAT
    assert outcome.solver_calls == 1
    assert report.metrics.solver_calls == 1
    assert report.sat_branches == 0
    assert [path.name for path in (tmp_path / "smt").iterdir()] == ["2_0_sliced.smt2"]
