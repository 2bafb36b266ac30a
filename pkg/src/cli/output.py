"""
Deterministic CSV / JSON emission.
"""
import json
import sys
from pathlib import Path
from typing import Dict, Optional, Union
import numpy as np
import pandas as pd
from loguru import logger

FLOAT_FORMAT = "%.12g"

Payload = Union[pd.DataFrame, Dict]


def _default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def render(payload: Payload, fmt: str) -> str:
    """Serialize a table or a report dict."""
    if fmt == "csv":
        if isinstance(payload, dict):
            payload = pd.json_normalize(payload)
        return payload.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

    if isinstance(payload, pd.DataFrame):
        payload = payload.to_dict(orient="records")
    return json.dumps(payload, indent=2, sort_keys=True, default=_default) + "\n"


def write_output(payload: Payload, fmt: str, out: Optional[str] = None) -> None:
    """Write ``payload`` to ``out`` (stdout when None)."""
    text = render(payload, fmt)
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info(f"Wrote {fmt.upper()} output to {path}")


def sibling_path(out: Optional[str], suffix: str) -> Optional[str]:
    """``results.csv`` -> ``results_<suffix>.csv``."""
    if out is None:
        return None
    path = Path(out)
    return str(path.with_name(f"{path.stem}_{suffix}{path.suffix}"))
