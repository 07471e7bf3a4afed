"""
Core module: Configuración, errores y utilidades compartidas
"""
