import threading
from collections import OrderedDict
from typing import Any, Callable, Hashable
from .config import CACHE_MAX
from .logging_setup import log

class MemoCache:
    """Bounded memo table guarded by a lock; oldest entries go first."""
    def __init__(self, name: str, max_size: int = CACHE_MAX):
        self.name, self.max_size = name, max_size
        self.hits = self.misses = 0
        self._data: "OrderedDict[Hashable, Any]" = OrderedDict()
        self._lock = threading.Lock()

    def __len__(self): return len(self._data)

    def get_or_compute(self, key: Hashable, fn: Callable[[], Any]) -> Any:
        with self._lock:
            if key in self._data:
                self.hits += 1
                return self._data[key]
        val = fn()
        with self._lock:
            self.misses += 1
            self._data[key] = val
            while len(self._data) > self.max_size: self._data.popitem(last=False)
        return val

    def clear(self):
        with self._lock:
            n = len(self._data); self._data.clear(); self.hits = self.misses = 0
        if n: log.debug(f"cache {self.name}: dropped {n} entr{'y' if n == 1 else 'ies'}")

psi_cache    = MemoCache("psi")
k_cache      = MemoCache("k_second")
ds_cache     = MemoCache("psi_ds")
matrix_cache = MemoCache("cov_matrix", max_size=32)

def clear_all():
    for c in (psi_cache, k_cache, ds_cache, matrix_cache): c.clear()
