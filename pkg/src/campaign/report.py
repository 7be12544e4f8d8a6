"""
Текстовые отчеты кампаний и запись корпуса
"""

from pathlib import Path
from typing import List, Sequence

from ..strategies.predicate_builder import QueryKind
from .campaign_harness import CampaignReport, CoverageRow
from .outcome import InversionOutcome

CSV_HEADER = "mode,correct,sat,accuracy,speed,coverage"
COVERAGE_HEADER = "config,coverage,correct,sat,growth"


def format_report(report: CampaignReport) -> str:
    """Отчет в виде строк key=value"""
    metrics = report.metrics
    lines = [
        f"mode={report.mode.value}",
        f"targets={metrics.targets}",
        f"correct={metrics.correct_branches}",
        f"sat={metrics.sat_branches}",
        f"accuracy={metrics.accuracy:.4f}",
        f"speed={metrics.speed:.4f}",
        f"elapsed={metrics.elapsed:.3f}",
        f"correct_sites={metrics.correct_sites}",
        f"sat_sites={metrics.sat_sites}",
        f"solver_calls={metrics.solver_calls}",
        f"coverage_base={report.coverage_base}",
        f"coverage_generated={report.coverage_with_generated}",
        f"corpus={len(report.corpus)}",
    ]
    for item in metrics.breakdown:
        prefix = f"strategy.{item.kind.value}"
        lines.extend([
            f"{prefix}.queries={item.queries}",
            f"{prefix}.sat={item.sat}",
            f"{prefix}.saved={item.saved}",
            f"{prefix}.correct={item.correct}",
            f"{prefix}.incorrect={item.incorrect}",
            f"{prefix}.not_reached={item.not_reached}",
            f"{prefix}.errors={item.errors}",
        ])
    return "\n".join(lines) + "\n"


def format_csv_row(report: CampaignReport) -> str:
    return (
        f"{report.mode.value},{report.correct_branches},{report.sat_branches},"
        f"{report.accuracy:.4f},{report.speed:.4f},{report.coverage_with_generated}"
    )


def format_csv(reports: Sequence[CampaignReport]) -> str:
    return "\n".join([CSV_HEADER] + [format_csv_row(report) for report in reports]) + "\n"


def format_coverage_table(rows: Sequence[CoverageRow]) -> str:
    """
    Таблица покрытия Base/Opt/Sopt

    После таблицы идут строки прироста вида `Opt / Base=+0.00%`.
    """
    lines = [COVERAGE_HEADER]
    for row in rows:
        growth = "-" if row.growth is None else f"{row.growth:+.2f}%"
        lines.append(f"{row.label},{row.coverage},{row.correct},{row.sat},{growth}")
    for previous, row in zip(rows, rows[1:]):
        lines.append(f"{row.label} / {previous.label}={row.growth:+.2f}%")
    return "\n".join(lines) + "\n"


def format_outcome(outcome: InversionOutcome) -> str:
    """Подробности инвертирования одного ветвления"""
    target = outcome.target
    lines = [
        f"target=seq {target.seq} src {target.src_addr} occurrence {target.occurrence}",
    ]
    for kind in QueryKind:
        if kind not in outcome.queries:
            continue
        verdict = outcome.verdicts.get(kind)
        lines.append(f"query={outcome.queries[kind].dump()}")
        status = verdict.status.value if verdict else "-"
        lines.append(f"{kind.value}.verdict={status}")
        if verdict is not None and verdict.model is not None:
            model = ",".join(f"{index}:0x{value:02x}" for index, value in sorted(verdict.model.items()))
            lines.append(f"{kind.value}.model={{{model}}}")
        if kind in outcome.errors:
            lines.append(f"{kind.value}.error={outcome.errors[kind]}")
        if kind in outcome.inputs:
            lines.append(f"{kind.value}.input={outcome.inputs[kind].hex()}")
        if kind in outcome.correctness:
            lines.append(f"{kind.value}.validation={outcome.correctness[kind].value}")
    lines.append(f"strong_matches_optimistic={str(outcome.strong_matches_optimistic).lower()}")
    lines.append(f"counted_sat={outcome.counted_sat}")
    lines.append(f"counted_correct={outcome.counted_correct}")
    return "\n".join(lines) + "\n"


def write_corpus(report: CampaignReport, directory: Path) -> List[Path]:
    """Запись входов корпуса файлами <src>_<occurrence>_<kind>.bin"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for item in report.corpus:
        path = directory / item.file_name
        path.write_bytes(item.data)
        paths.append(path)
    return paths


def write_report(report: CampaignReport, directory: Path) -> List[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    text_path = directory / "report.txt"
    csv_path = directory / "report.csv"
    text_path.write_text(format_report(report), encoding="utf-8")
    csv_path.write_text(format_csv([report]), encoding="utf-8")
    return [text_path, csv_path]
