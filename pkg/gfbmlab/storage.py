import csv, json, math, os, platform, time
from dataclasses import asdict, is_dataclass
from typing import Any, Dict, List, Sequence
import numpy as np
import scipy
from . import __version__
from .config import META_SUFFIX, THREADS
from .errors import DomainError
from .helpers import fmt17
from .logging_setup import log

def _ensure_dir(path: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)

def _jsonable(v: Any):
    if is_dataclass(v) and not isinstance(v, type): return _jsonable(asdict(v))
    if isinstance(v, dict): return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)): return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray): return _jsonable(v.tolist())
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, np.integer): return int(v)
    if isinstance(v, np.bool_): return bool(v)
    return v

# ---- CSV ----
def write_matrix_csv(path: str, header: Sequence[str], data: np.ndarray):
    """Numeric table with 17 significant digits, '.' decimal, no separators."""
    _ensure_dir(path)
    np.savetxt(path, np.asarray(data, dtype=float), fmt="%.17g", delimiter=",", header=",".join(header), comments="")
    log.info(f"Wrote {np.shape(data)[0]} row(s) to {path}")

def write_rows_csv(path: str, rows: List[Dict[str, Any]], columns: Sequence[str] = None):
    if not rows and not columns: raise DomainError("nothing to write: no rows and no columns")
    cols = list(columns or rows[0].keys())
    _ensure_dir(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([fmt17(r[c]) if isinstance(r[c], (float, np.floating)) else r[c] for c in cols])
    log.info(f"Wrote {len(rows)} row(s) to {path}")

def paths_csv(path: str, grid_points: np.ndarray, values: np.ndarray):
    """t,path_0,...,path_{m-1}; one row per grid point."""
    v = np.atleast_2d(values)
    header = ["t"] + [f"path_{i}" for i in range(v.shape[0])]
    write_matrix_csv(path, header, np.column_stack([grid_points, v.T]))

# ---- JSON ----
def write_json(path: str, obj: Any, pretty: bool = True):
    _ensure_dir(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_jsonable(obj), f, ensure_ascii=False, indent=2 if pretty else None)
    log.info(f"Wrote {path}")

def dumps(obj: Any, pretty: bool = True) -> str:
    return json.dumps(_jsonable(obj), ensure_ascii=False, indent=2 if pretty else None)

def write_meta(data_path: str, config: Dict[str, Any], seed, jitter: float, started: float) -> str:
    """Sidecar with the full run config, seed, versions and runtime next to ``data_path``."""
    meta = dict(config=config, seed=seed, jitter=jitter, runtime_s=round(time.time() - started, 3),
                threads=config.get("threads", THREADS),
                versions=dict(gfbmlab=__version__, numpy=np.__version__, scipy=scipy.__version__,
                              python=platform.python_version()))
    path = data_path + META_SUFFIX
    write_json(path, meta)
    return path

# ---- Config files ----
def load_config_file(path: str) -> Dict[str, str]:
    """key = value lines (UTF-8); '#' starts a comment; keys use dashes or underscores."""
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            for n, line in enumerate(f, 1):
                line = line.split("#", 1)[0].strip()
                if not line: continue
                if "=" not in line: raise DomainError(f"{path}:{n}: expected key = value, got {line!r}")
                k, v = line.split("=", 1)
                out[k.strip().replace("-", "_")] = v.strip()
        log.info(f"Loaded {len(out)} setting(s) from {path}")
    except FileNotFoundError:
        raise DomainError(f"config file not found: {path}") from None
    return out
