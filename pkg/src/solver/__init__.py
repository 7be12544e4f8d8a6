"""
Решатели запросов инвертирования
"""
