import json
import math
from pathlib import Path

import numpy as np
import pandas as pd

from runner.log_manager import get_logger
from runner.models import ResultRecord

logger = get_logger("runner.output")


def _clean(value):
    """Valori JSON-compatibili: tipi numpy -> python, NaN -> null, infiniti -> stringa."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
    return value


def _dump_json(payload: dict, path: Path):
    path.write_text(json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def metadata_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def write_result(record: ResultRecord, path, fmt: str = "csv") -> Path:
    """Scrive le righe (CSV con metadati a parte, oppure un unico JSON)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        pd.DataFrame(record.rows).to_csv(path, index=False)
        _dump_json(record.metadata(), metadata_path(path))
    elif fmt == "json":
        _dump_json({"metadata": record.metadata(), "rows": record.rows}, path)
    else:
        raise ValueError(f"formato non supportato: {fmt}")
    logger.info(f"Risultati {record.experiment}: {len(record.rows)} righe in {path}")
    return path
