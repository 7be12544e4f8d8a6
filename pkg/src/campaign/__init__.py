"""
Кампании инвертирования ветвлений, валидация и метрики
"""
