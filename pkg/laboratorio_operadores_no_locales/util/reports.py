# laboratorio_operadores_no_locales/util/reports.py
"""Escritura de reportes reproducibles: hash de configuración, semilla y guardia de sobrescritura."""

import hashlib
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, Field

from ..exceptions import ContractViolation
from ..models.grids import GridFunction
from ..models.reports import CheckResult, ExperimentConfig

logger = logging.getLogger("laboratorio_operadores")


class ExperimentReport(BaseModel):
    command: str
    config_hash: str
    seed: int
    grid: Dict[str, Any] = {}
    checks: List[CheckResult] = []
    results: Dict[str, Any] = {}
    passed: bool = True
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 del JSON canónico de la configuración."""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_report(
    config: ExperimentConfig,
    checks: Optional[List[CheckResult]] = None,
    results: Optional[Dict[str, Any]] = None,
    grid: Optional[Dict[str, Any]] = None,
) -> ExperimentReport:
    checks = checks or []
    return ExperimentReport(
        command=config.command,
        config_hash=config_hash(config),
        seed=config.seed,
        grid=grid or {},
        checks=checks,
        results=results or {},
        passed=all(check.passed for check in checks),
    )


def _target(out_dir: Path, name: str, overwrite: bool) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    if path.exists() and not overwrite:
        raise ContractViolation(f"{path} already exists, pass --overwrite to replace it")
    return path


def write_report(report: ExperimentReport, out_dir: Path, name: str, overwrite: bool = False) -> Path:
    path = _target(out_dir, name, overwrite)
    payload = report.model_dump(mode="json")
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Report written to {path}")
    return path


def write_frame(frame: pd.DataFrame, out_dir: Path, name: str, overwrite: bool = False) -> Path:
    path = _target(out_dir, name, overwrite)
    frame.to_csv(path, index=False)
    logger.info(f"Table written to {path}")
    return path


def write_grid_function(u: GridFunction, out_dir: Path, name: str, overwrite: bool = False) -> Path:
    path = _target(out_dir, name, overwrite)
    u.write(path)
    return path
