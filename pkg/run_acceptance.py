#!/usr/bin/env python3
"""Script para ejecutar todas las verificaciones del laboratorio y dejar un resumen en CSV."""

import sys
import time
from pathlib import Path

import pandas as pd

from laboratorio_operadores_no_locales import lab_config
from laboratorio_operadores_no_locales.exceptions import LabError
from laboratorio_operadores_no_locales.services.verification import CHECKS, run_verify

# Las verificaciones lentas (solvers) se pueden saltar con --quick
SLOW_CHECKS = {"mountain-pass", "jumping-solve", "spectral-agreement", "poincare"}


def run_acceptance(quick: bool = False) -> bool:
    """Ejecuta cada verificación registrada y escribe acceptance_summary.csv."""

    lab_config.configure_logging("WARNING")
    out_dir = Path(lab_config.OUTPUT_DIR)
    out_dir.mkdir(parents=True, exist_ok=True)

    print("=== VERIFICACIONES DEL LABORATORIO ===\n")

    rows = []
    for check_id, check in CHECKS.items():
        if quick and check_id in SLOW_CHECKS:
            print(f"⏭️  {check_id}: omitida (--quick)")
            continue
        start = time.perf_counter()
        try:
            frame, passed = run_verify(check_id, {"seed": lab_config.SEED})
            detail = f"{int(frame['passed'].sum())}/{len(frame)}"
        except LabError as e:
            passed, detail = False, str(e)
        elapsed = time.perf_counter() - start
        print(f"{'✅' if passed else '❌'} {check_id}: {check.description} ({detail}, {elapsed:.1f} s)")
        rows.append({"check": check_id, "passed": passed, "detail": detail, "seconds": round(elapsed, 2)})

    summary = pd.DataFrame(rows)
    summary.to_csv(out_dir / "acceptance_summary.csv", index=False)

    all_passed = bool(summary["passed"].all()) if not summary.empty else False
    print(f"\n📄 Resumen: {out_dir / 'acceptance_summary.csv'}")
    print("\n✅ TODAS LAS VERIFICACIONES PASARON" if all_passed else "\n❌ HAY VERIFICACIONES FALLIDAS")
    return all_passed


if __name__ == "__main__":
    ok = run_acceptance(quick="--quick" in sys.argv)
    sys.exit(0 if ok else 1)
