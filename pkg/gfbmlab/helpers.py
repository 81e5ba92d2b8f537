import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, Tuple
import numpy as np
from .config import THREADS
from .errors import DomainError

def fmt17(x) -> str:
    return format(float(x), ".17g")

def humanize_float(x: Optional[float], digits: int = 4) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)): return "—"
    if isinstance(x, float) and math.isinf(x): return "∞" if x > 0 else "-∞"
    return f"{x:.{digits}f}"

def parse_floats(v: str) -> List[float]:
    """'a,b,c' or 'start:stop:count' (inclusive linspace)."""
    v = str(v).strip()
    try:
        if ":" in v:
            a, b, n = v.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(n))]
        return [float(x) for x in v.split(",") if x.strip()]
    except ValueError:
        raise DomainError(f"cannot parse number list {v!r}") from None

def parse_ints(v: str) -> List[int]:
    """'64,256' or powers written '2^8'."""
    out = []
    for x in str(v).split(","):
        x = x.strip()
        if not x: continue
        try:
            if "^" in x: b, e = x.split("^"); out.append(int(b) ** int(e))
            else: out.append(int(x))
        except ValueError:
            raise DomainError(f"cannot parse integer list {v!r}") from None
    return out

def parse_bool(v) -> bool:
    if isinstance(v, bool): return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"): return True
    if s in ("0", "false", "no", "off", ""): return False
    raise DomainError(f"cannot parse boolean {v!r}")

def mean_stderr(xs) -> Tuple[float, float]:
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    if n == 0: return float("nan"), float("nan")
    m = float(xs.mean())
    return m, (float(xs.std(ddof=1)) / math.sqrt(n) if n > 1 else float("nan"))

def pmap(fn: Callable, items: Iterable, threads: Optional[int] = None) -> list:
    """Ordered map; thread pool when more than one worker is allowed."""
    items = list(items)
    threads = THREADS if threads is None else max(1, int(threads))
    if threads == 1 or len(items) < 2: return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as ex:
        return list(ex.map(fn, items))

def divides_all(ns: Sequence[int], N: int) -> bool:
    return all(n > 0 and N % n == 0 for n in ns)
