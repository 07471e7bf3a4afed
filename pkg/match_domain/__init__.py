"""
Match Domain: Votos, profundidad, planificación y oráculo de matching
"""
