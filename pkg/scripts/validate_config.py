#!/usr/bin/env python3
"""
Скрипт для валидации конфигурации лаборатории
"""

import sys
from pathlib import Path
from typing import Any, Dict

import yaml

sys.path.append(str(Path(__file__).resolve().parent.parent))

from src.utils.config_manager import MODES, REQUIRED_SECTIONS, ConfigManager


def validate_config(config_path: str) -> bool:
    """
    Валидация конфигурационного файла

    Args:
        config_path: Путь к конфигурационному файлу

    Returns:
        True если конфигурация валидна
    """
    try:
        print(f"🔍 Проверка конфигурации: {config_path}")

        with open(config_path, 'r', encoding='utf-8') as file:
            config = yaml.safe_load(file)

        if not config:
            print("❌ Конфигурация пуста")
            return False
        if not isinstance(config, dict):
            print("❌ Конфигурация должна быть словарем секций")
            return False

        for section in REQUIRED_SECTIONS:
            if section not in config:
                print(f"❌ Отсутствует обязательная секция: {section}")
                return False

        # Полная проверка значений по правилам менеджера конфигурации
        ConfigManager(config_path, validate=True)

        validate_solver_section(config['solver'] or {})
        validate_campaign_section(config['campaign'] or {})

        print("✅ Конфигурация валидна!")
        return True

    except FileNotFoundError:
        print(f"❌ Файл конфигурации не найден: {config_path}")
        return False
    except yaml.YAMLError as e:
        print(f"❌ Ошибка синтаксиса YAML: {e}")
        return False
    except ValueError as e:
        print(f"❌ {e}")
        return False


def validate_solver_section(solver_config: Dict[str, Any]):
    """Предупреждения по секции solver"""
    print("🧮 Проверка настроек решателя...")

    timeout = solver_config.get('timeout', 10)
    if isinstance(timeout, (int, float)) and timeout > 60:
        print(f"⚠️  solver.timeout={timeout}: длинные таймауты замедляют кампанию")

    if solver_config.get('max_bytes', 3) == 4:
        print("⚠️  solver.max_bytes=4 означает до 2^32 кандидатов на запрос")

    command = str(solver_config.get('external_command') or '')
    if solver_config.get('backend') == 'brute_force' and command.strip():
        print("ℹ️  Внешний решатель будет использован только для слишком широких запросов")

    print("✅ Настройки решателя корректны")


def validate_campaign_section(campaign_config: Dict[str, Any]):
    """Предупреждения по секции campaign"""
    print("🎯 Проверка настроек кампании...")

    mode = campaign_config.get('mode', 'opt+sopt')
    if mode not in MODES:
        print(f"⚠️  Неизвестный режим: {mode}")
    elif mode == 'default':
        print("ℹ️  Режим default решает только срезы")
    if campaign_config.get('jobs', 1) > 1:
        print("⚠️  campaign.jobs > 1: порядок решения недетерминирован")
    if campaign_config.get('budget_seconds') is not None:
        print("ℹ️  Бюджет по времени делает число обработанных ветвлений недетерминированным")

    print("✅ Настройки кампании корректны")


def main():
    """Основная функция"""
    if len(sys.argv) != 2:
        print("Использование: python validate_config.py <путь_к_config.yaml>")
        print("Пример: python validate_config.py config/main.yaml")
        sys.exit(1)

    config_path = sys.argv[1]

    if not Path(config_path).exists():
        print(f"❌ Файл не найден: {config_path}")
        sys.exit(1)

    if validate_config(config_path):
        print("\n🎉 Конфигурация готова к использованию!")
        sys.exit(0)
    else:
        print("\n❌ Конфигурация содержит ошибки!")
        sys.exit(1)


if __name__ == "__main__":
    main()
