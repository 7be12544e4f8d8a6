"""
Основной класс лаборатории конколического исполнения
"""

import time
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional

from loguru import logger

from ..campaign.campaign_harness import CampaignHarness, StrategyConfig, ValidationMode
from ..solver.solver_manager import SolverManager
from ..strategies.flowchart import StrategyMode
from ..utils.config_manager import ConfigManager
from ..vm.assembler import assemble
from ..vm.interpreter import InputLengthError, edge_coverage
from ..vm.isa import Program


class ConcolicLab:
    """
    Связывает конфигурацию, решатель и кампании для одной сессии
    """

    def __init__(self, config_path: Optional[str] = None,
                 overrides: Optional[Dict[str, Dict[str, Any]]] = None):
        """
        Инициализация лаборатории

        Args:
            config_path: Путь к конфигурационному файлу
            overrides: Значения командной строки по секциям
        """
        self.config_manager = ConfigManager(config_path)
        if overrides:
            self.config_manager.apply_overrides(overrides)
        self.config = self.config_manager.get_config()
        self.solver = SolverManager(self.config['solver'])
        logger.debug("Лаборатория инициализирована")

    @property
    def step_limit(self) -> int:
        return self.config['vm']['step_limit']

    def load_program(self, path: Path) -> Program:
        """
        Сборка программы из файла

        Raises:
            AssemblyError: ошибка в исходном тексте
        """
        path = Path(path)
        program = assemble(path.read_text(encoding='utf-8'))
        logger.info(f"Программа {path.name} собрана: {len(program)} команд, вход {program.input_length} байт")
        return program

    def load_seed(self, path: Path, program: Program) -> bytes:
        data = Path(path).read_bytes()
        if len(data) != program.input_length:
            raise InputLengthError(program.input_length, len(data))
        return data

    def load_corpus(self, directory: Path, program: Program) -> List[bytes]:
        """Все файлы *.bin каталога в порядке имен"""
        return [self.load_seed(path, program) for path in sorted(Path(directory).glob('*.bin'))]

    def strategy_config(self, smt_dump_dir: Optional[Path] = None) -> StrategyConfig:
        campaign = self.config['campaign']
        return StrategyConfig(
            mode=StrategyMode(campaign['mode']),
            solver_timeout=float(self.config['solver']['timeout']),
            max_branches=campaign.get('budget_branches'),
            time_budget=campaign.get('budget_seconds'),
            validate_mode=ValidationMode(campaign['validate']),
            jobs=int(campaign['jobs']),
            step_limit=self.step_limit,
            smt_dump_dir=smt_dump_dir,
        )

    def harness(self, program: Program, clock: Callable[[], float] = time.monotonic) -> CampaignHarness:
        return CampaignHarness(program, self.solver, clock)

    def coverage(self, program: Program, inputs: Iterable[bytes]) -> int:
        return edge_coverage(program, inputs, self.step_limit)
