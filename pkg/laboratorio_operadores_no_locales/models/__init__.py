# laboratorio_operadores_no_locales/models/__init__.py
"""Modelos de datos del laboratorio."""
