"""
Основные модули лаборатории конколического исполнения
"""
