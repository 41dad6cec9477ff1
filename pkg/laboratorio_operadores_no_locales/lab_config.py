# laboratorio_operadores_no_locales/lab_config.py
"""Configuración del laboratorio: variables de entorno con valores por defecto."""

import logging
import os

from dotenv import load_dotenv

load_dotenv()

SEED = int(os.getenv("LAB_SEED", "42"))
OUTPUT_DIR = os.getenv("LAB_OUTPUT_DIR", "./lab_outputs")
TOLERANCE = float(os.getenv("LAB_TOLERANCE", "1e-8"))
P_FALLBACK = float(os.getenv("LAB_P_FALLBACK", "6.0"))
LOG_LEVEL = os.getenv("LAB_LOG_LEVEL", "INFO").upper()

# Permitir sobrescribir reportes existentes sin pasar --overwrite
OVERWRITE = os.getenv("LAB_OVERWRITE", "0").lower() in {"1", "true", "yes"}
# Si lobpcg no alcanza el residuo pedido se resuelve el problema denso (solo dominios pequeños)
DENSE_EIGEN_FALLBACK = os.getenv("LAB_DENSE_EIGEN_FALLBACK", "1").lower() in {"1", "true", "yes"}
DENSE_EIGEN_LIMIT = int(os.getenv("LAB_DENSE_EIGEN_LIMIT", "4096"))

LOGGER_NAME = "laboratorio_operadores"
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def configure_logging(level: str = LOG_LEVEL, handler: logging.Handler | None = None) -> logging.Logger:
    """Configura el formato raíz una sola vez y devuelve el logger del laboratorio."""
    if handler is not None:
        logging.basicConfig(level=level, format="%(message)s", datefmt="[%X]", handlers=[handler], force=True)
    else:
        logging.basicConfig(level=level, format=LOG_FORMAT)
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)
    return logger
