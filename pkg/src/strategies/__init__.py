"""
Стратегии построения предикатов для инвертирования ветвлений
"""
