"""
Виртуальная регистровая машина: набор команд, ассемблер и интерпретатор
"""
