"""
Менеджер конфигурации лаборатории
"""

import copy
import os
import re
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from loguru import logger

MODES = ("default", "opt", "sopt", "opt+sopt")
VALIDATION_MODES = ("strict", "loose")
BACKENDS = ("brute_force", "external")
LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")
REQUIRED_SECTIONS = ("vm", "solver", "campaign", "logging")


class ConfigManager:
    """
    Менеджер для работы с конфигурационными файлами

    Значения из файла накладываются на конфигурацию по умолчанию.
    """

    def __init__(self, config_path: Optional[str] = None, validate: bool = True):
        """
        Инициализация менеджера конфигурации

        Args:
            config_path: Путь к конфигурационному файлу; None означает
                конфигурацию по умолчанию
            validate: Выполнять валидацию конфигурации при загрузке
        """
        self.config_path = Path(config_path) if config_path else None
        self.config: Dict[str, Any] = self._get_default_config()
        self._load_config()
        if validate:
            self._validate_config()

    def _load_config(self):
        """
        Загрузка конфигурации из файла
        """
        if self.config_path is None:
            logger.debug("Используется конфигурация по умолчанию")
            return
        if not self.config_path.exists():
            logger.warning(f"Файл конфигурации {self.config_path} не найден, используются значения по умолчанию")
            return

        try:
            content = self.config_path.read_text(encoding="utf-8")
            # Подстановка переменных окружения
            content = self._substitute_env_vars(content)
            loaded = yaml.safe_load(content)
        except yaml.YAMLError as e:
            logger.error(f"Ошибка синтаксиса YAML в конфигурации: {e}")
            raise ValueError(f"Ошибка синтаксиса YAML в {self.config_path}: {e}") from e

        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ValueError("Конфигурация должна быть словарем секций")
        self._deep_update(self.config, loaded)
        logger.info(f"Конфигурация загружена из {self.config_path}")

    def _validate_config(self):
        """
        Валидация загруженной конфигурации
        """
        missing_sections = [s for s in REQUIRED_SECTIONS if not isinstance(self.config.get(s), dict)]
        if missing_sections:
            raise ValueError(f"Отсутствуют обязательные секции конфигурации: {missing_sections}")

        vm_config = self.config["vm"]
        if not _positive_int(vm_config.get("step_limit")):
            raise ValueError("vm.step_limit должен быть положительным целым числом")

        solver_config = self.config["solver"]
        if solver_config.get("backend") not in BACKENDS:
            raise ValueError(f"solver.backend должен быть одним из {list(BACKENDS)}")
        timeout = solver_config.get("timeout")
        if not isinstance(timeout, (int, float)) or isinstance(timeout, bool) or timeout <= 0:
            raise ValueError("solver.timeout должен быть положительным числом")
        max_bytes = solver_config.get("max_bytes")
        if not _positive_int(max_bytes) or max_bytes > 4:
            raise ValueError("solver.max_bytes должен быть целым числом от 1 до 4")
        if not _positive_int(solver_config.get("check_interval")):
            raise ValueError("solver.check_interval должен быть положительным целым числом")
        if solver_config["backend"] == "external" and not solver_config.get("external_command"):
            raise ValueError("Для solver.backend=external нужна solver.external_command")

        campaign_config = self.config["campaign"]
        if campaign_config.get("mode") not in MODES:
            raise ValueError(f"campaign.mode должен быть одним из {list(MODES)}")
        if campaign_config.get("validate") not in VALIDATION_MODES:
            raise ValueError(f"campaign.validate должен быть одним из {list(VALIDATION_MODES)}")
        if not _positive_int(campaign_config.get("jobs")):
            raise ValueError("campaign.jobs должен быть положительным целым числом")
        budget_branches = campaign_config.get("budget_branches")
        if budget_branches is not None and not _positive_int(budget_branches):
            raise ValueError("campaign.budget_branches должен быть положительным целым числом или null")
        budget_seconds = campaign_config.get("budget_seconds")
        if budget_seconds is not None and (
                not isinstance(budget_seconds, (int, float)) or budget_seconds <= 0):
            raise ValueError("campaign.budget_seconds должен быть положительным числом или null")

        level = str(self.config["logging"].get("level", "")).upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"logging.level должен быть одним из {list(LOG_LEVELS)}")

        logger.debug("Валидация конфигурации пройдена успешно")

    def _substitute_env_vars(self, content: str) -> str:
        """
        Подстановка переменных окружения в конфигурацию

        Args:
            content: Содержимое конфигурационного файла

        Returns:
            Контент с подставленными переменными окружения
        """
        def replace_env_var(match):
            var_name = match.group(1)
            default_value = match.group(2) if match.group(2) else ''
            return os.getenv(var_name, default_value)

        # Паттерн для ${VAR_NAME} или ${VAR_NAME:default_value}
        pattern = r'\$\{([^:}]+)(?::([^}]*))?\}'
        return re.sub(pattern, replace_env_var, content)

    def _get_default_config(self) -> Dict[str, Any]:
        """
        Получение конфигурации по умолчанию

        Returns:
            Словарь с конфигурацией по умолчанию
        """
        return {
            'vm': {
                'step_limit': 1_000_000,
            },
            'solver': {
                'backend': 'brute_force',
                'timeout': 10,
                'max_bytes': 3,
                'check_interval': 65536,
                'external_command': os.getenv('CONCOLIC_SOLVER_CMD', ''),
            },
            'campaign': {
                'mode': 'opt+sopt',
                'budget_branches': None,
                'budget_seconds': None,
                'validate': 'strict',
                'jobs': 1,
                'smt_dump': False,
            },
            'logging': {
                'level': 'INFO',
                'file': None,
                'rotation': '10 MB',
                'retention': '7 days',
            },
        }

    def get_config(self) -> Dict[str, Any]:
        """
        Получение конфигурации

        Returns:
            Словарь с конфигурацией
        """
        return self.config

    def get_section(self, section: str) -> Dict[str, Any]:
        """
        Получение секции конфигурации

        Args:
            section: Название секции

        Returns:
            Копия словаря секции
        """
        return copy.deepcopy(self.config.get(section, {}))

    def apply_overrides(self, updates: Dict[str, Any]):
        """
        Наложение значений из командной строки поверх загруженных

        Значения None пропускаются, файл конфигурации не изменяется.

        Args:
            updates: Словарь секций с обновлениями
        """
        cleaned = {
            section: {key: value for key, value in values.items() if value is not None}
            for section, values in updates.items()
        }
        self._deep_update(self.config, cleaned)
        self._validate_config()

    def _deep_update(self, base_dict: Dict, update_dict: Dict):
        """
        Глубокое обновление словаря

        Args:
            base_dict: Базовый словарь
            update_dict: Словарь с обновлениями
        """
        for key, value in update_dict.items():
            if key in base_dict and isinstance(base_dict[key], dict) and isinstance(value, dict):
                self._deep_update(base_dict[key], value)
            else:
                base_dict[key] = value


def _positive_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value > 0
