"""
Вспомогательные модули: конфигурация и логирование
"""
