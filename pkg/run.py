#!/usr/bin/env python3
"""
Главный файл запуска лаборатории конколического исполнения
"""

import argparse
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from loguru import logger

# Добавление корневой директории в путь
root_dir = Path(__file__).parent
sys.path.append(str(root_dir))

from src.campaign.campaign_harness import LogicalClock, default_comparison
from src.campaign.report import (
    format_coverage_table, format_csv, format_outcome, format_report, write_corpus, write_report,
)
from src.core.concolic_lab import ConcolicLab
from src.strategies.predicate_builder import QueryKind, format_sopt_steps, trace_strong_optimistic
from src.symbolic.concolic_engine import dump_trace, run_concolic
from src.utils.logger_config import setup_logging
from src.vm.assembler import AssemblyError, disassemble
from src.vm.interpreter import Termination, run_concrete

DEFAULT_CONFIG = root_dir / "config" / "main.yaml"
MODES = ["default", "opt", "sopt", "opt+sopt"]
LOG_LEVELS = ["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"]

EPILOG = """
Примеры использования:
  python run.py asm --program corpus/programs/listing1.asm
  python run.py trace --program corpus/programs/listing1.asm --seed corpus/seeds/listing1.bin
  python run.py invert --program corpus/programs/listing1.asm --seed corpus/seeds/listing1.bin --target 3
  python run.py campaign --program corpus/programs/listing1.asm --seed corpus/seeds/listing1.bin --mode opt+sopt --out results
  python run.py compare --program corpus/programs/listing1.asm --seed corpus/seeds/listing1.bin --clock logical
  python run.py coverage --program corpus/programs/listing1.asm --seed corpus/seeds/listing1.bin --corpus results/corpus

Переменная окружения CONCOLIC_SOLVER_CMD задает команду внешнего решателя
по умолчанию (например "z3 -in").
"""


def existing_path(value: str) -> Path:
    path = Path(value)
    if not path.exists():
        raise argparse.ArgumentTypeError(f"путь не существует: {value}")
    return path


def existing_dir(value: str) -> Path:
    path = existing_path(value)
    if not path.is_dir():
        raise argparse.ArgumentTypeError(f"не каталог: {value}")
    return path


def positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидается целое число: {value}") from None
    if number <= 0:
        raise argparse.ArgumentTypeError(f"ожидается положительное число: {value}")
    return number


def non_negative_int(value: str) -> int:
    if value.isdigit():
        return int(value)
    raise argparse.ArgumentTypeError(f"ожидается неотрицательное целое: {value}")


def positive_float(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидается число: {value}") from None
    if number <= 0:
        raise argparse.ArgumentTypeError(f"ожидается положительное число: {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--program', type=existing_path, required=True,
                        help='Исходный текст программы (.asm)')
    common.add_argument('--seed', type=existing_path, help='Начальный вход, сырые байты')
    common.add_argument('--mode', choices=MODES, help='Режим стратегий (по умолчанию opt+sopt)')
    common.add_argument('--solver-timeout', type=positive_float, help='Таймаут запроса, с (по умолчанию 10)')
    common.add_argument('--budget-branches', type=positive_int, help='Максимум целевых ветвлений')
    common.add_argument('--budget-seconds', type=positive_float, help='Бюджет времени кампании, с')
    common.add_argument('--validate', choices=['strict', 'loose'], help='Правило проверки входов')
    common.add_argument('--out', type=Path, help='Каталог для корпуса и отчетов')
    common.add_argument('--smt-dump', action='store_true', help='Сохранять SMT-LIB текст каждого запроса в --out/smt')
    common.add_argument('--jobs', type=positive_int, help='Параллельных решений (1 = детерминированно)')
    common.add_argument('--solver-cmd', help='Команда внешнего решателя')
    common.add_argument('--step-limit', type=positive_int, help='Лимит шагов исполнения')
    common.add_argument('--target', type=non_negative_int, help='Номер целевого ветвления для invert')
    common.add_argument('--corpus', type=existing_dir, help='Каталог входов для coverage')
    common.add_argument('--clock', choices=['monotonic', 'logical'], default='monotonic',
                        help='Источник времени для метрики Speed')
    common.add_argument('--config', type=existing_path, help='Путь к конфигурационному файлу')
    common.add_argument('--log-level', type=str.upper, choices=LOG_LEVELS,
                        help='Уровень логирования')

    parser = argparse.ArgumentParser(
        description='Лаборатория конколического исполнения: инвертирование ветвлений '
                    'срезом, оптимистичной и сильной оптимистичной стратегиями',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    subparsers = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')
    for name, help_text in COMMAND_HELP.items():
        subparsers.add_parser(name, parents=[common], help=help_text,
                              formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


def build_overrides(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    return {
        'vm': {'step_limit': args.step_limit},
        'solver': {'timeout': args.solver_timeout, 'external_command': args.solver_cmd},
        'campaign': {
            'mode': args.mode,
            'budget_branches': args.budget_branches,
            'budget_seconds': args.budget_seconds,
            'validate': args.validate,
            'jobs': args.jobs,
            'smt_dump': args.smt_dump or None,
        },
        'logging': {'level': args.log_level},
    }


def make_clock(args: argparse.Namespace):
    if args.clock == 'logical':
        return LogicalClock()
    return time.monotonic


def cmd_asm(lab: ConcolicLab, args: argparse.Namespace) -> int:
    program = lab.load_program(args.program)
    print(disassemble(program), end='')
    return 0


def cmd_run(lab: ConcolicLab, args: argparse.Namespace) -> int:
    program = lab.load_program(args.program)
    seed = lab.load_seed(args.seed, program)
    trace = run_concrete(program, seed, lab.step_limit)
    print(f"terminated={trace.terminated.value}")
    print(f"steps={trace.steps}")
    print(f"edges={len(trace.edge_set())}")
    for event in trace.branch_events:
        print(f"branch={event.src} taken={str(event.taken).lower()} occurrence={event.occurrence}")
    if trace.terminated is Termination.FAULT:
        logger.error(f"Исполнение завершилось сбоем: {trace.fault}")
        return 1
    return 0


def cmd_trace(lab: ConcolicLab, args: argparse.Namespace) -> int:
    program = lab.load_program(args.program)
    seed = lab.load_seed(args.seed, program)
    predicate = run_concolic(program, seed, lab.step_limit)
    print(dump_trace(predicate), end='')
    return 0


def cmd_invert(lab: ConcolicLab, args: argparse.Namespace) -> int:
    program = lab.load_program(args.program)
    seed = lab.load_seed(args.seed, program)
    predicate = run_concolic(program, seed, lab.step_limit)
    if not len(predicate):
        logger.error("В предикате пути нет символьных ветвлений")
        return 1
    target = len(predicate) - 1 if args.target is None else args.target
    if target >= len(predicate):
        logger.error(f"Номер ветвления {target} вне диапазона 0..{len(predicate) - 1}")
        return 1

    harness = lab.harness(program, make_clock(args))
    config = lab.strategy_config(smt_dump_dir(lab, args))
    outcome = harness.invert_target(predicate, target, config)
    harness.validate_outcome(predicate, outcome, config)
    print(format_outcome(outcome), end='')

    _, steps = trace_strong_optimistic(predicate, outcome.queries[QueryKind.SLICED], target)
    print("sopt_trace:")
    print(format_sopt_steps(steps), end='')
    return 0


def cmd_campaign(lab: ConcolicLab, args: argparse.Namespace) -> int:
    program = lab.load_program(args.program)
    seed = lab.load_seed(args.seed, program)
    harness = lab.harness(program, make_clock(args))
    report = harness.invert_all(seed, lab.strategy_config(smt_dump_dir(lab, args)))
    print(format_report(report), end='')
    print(format_csv([report]), end='')
    if args.out:
        written = write_corpus(report, args.out / 'corpus') + write_report(report, args.out)
        logger.info(f"Записано файлов в {args.out}: {len(written)}")
    return 0


def cmd_compare(lab: ConcolicLab, args: argparse.Namespace) -> int:
    program = lab.load_program(args.program)
    seed = lab.load_seed(args.seed, program)
    harness = lab.harness(program, make_clock(args))
    rows = harness.compare_configs(seed, default_comparison(lab.strategy_config()))
    print(format_coverage_table(rows), end='')
    return 0


def cmd_coverage(lab: ConcolicLab, args: argparse.Namespace) -> int:
    program = lab.load_program(args.program)
    inputs = [lab.load_seed(args.seed, program)]
    if args.corpus:
        inputs += lab.load_corpus(args.corpus, program)
    print(f"inputs={len(inputs)}")
    print(f"edges={lab.coverage(program, inputs)}")
    return 0


def smt_dump_dir(lab: ConcolicLab, args: argparse.Namespace) -> Optional[Path]:
    if lab.config['campaign'].get('smt_dump') and args.out is not None:
        return args.out / 'smt'
    return None


COMMAND_HELP = {
    'asm': 'Сборка и вывод дизассемблированной программы',
    'run': 'Конкретное исполнение с трассой ветвлений',
    'trace': 'Дамп предиката пути конколического запуска',
    'invert': 'Инвертирование одного ветвления со всеми стратегиями',
    'campaign': 'Кампания инвертирования всех ветвлений',
    'compare': 'Сравнение покрытия Base/Opt/Sopt',
    'coverage': 'Покрытие ребер для seed и каталога входов',
}

COMMANDS: Dict[str, Callable[[ConcolicLab, argparse.Namespace], int]] = {
    'asm': cmd_asm,
    'run': cmd_run,
    'trace': cmd_trace,
    'invert': cmd_invert,
    'campaign': cmd_campaign,
    'compare': cmd_compare,
    'coverage': cmd_coverage,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Точка входа командной строки

    Returns:
        0 при успехе, 1 при сбое анализа, 2 при ошибке использования
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    if args.command != 'asm' and args.seed is None:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: ошибка: нужен --seed", file=sys.stderr)
        return 2
    if args.smt_dump and args.out is None:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: ошибка: --smt-dump требует --out", file=sys.stderr)
        return 2

    setup_logging(args.log_level or 'INFO')
    try:
        config_path = args.config or (DEFAULT_CONFIG if DEFAULT_CONFIG.exists() else None)
        lab = ConcolicLab(config_path, build_overrides(args))
        logging_config = lab.config['logging']
        setup_logging(
            logging_config['level'],
            logging_config.get('file'),
            logging_config.get('rotation', '10 MB'),
            logging_config.get('retention', '7 days'),
        )
        return COMMANDS[args.command](lab, args)
    except AssemblyError as e:
        logger.error(f"Ошибка сборки {args.program}: {e}")
        return 2
    except (ValueError, OSError) as e:
        logger.error(f"Ошибка анализа: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
