"""
Shape Domain: Geometría, muestreo y carga de formas (triangle soups)
"""
