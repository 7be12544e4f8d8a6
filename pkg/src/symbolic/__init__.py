"""
Конколическое исполнение: символьные выражения и построение предиката пути
"""
