"""
Лаборатория конколического исполнения на учебной регистровой машине
"""

__version__ = "1.0.0"
