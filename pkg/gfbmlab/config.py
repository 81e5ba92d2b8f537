import os
from dotenv import load_dotenv

load_dotenv()

# ---- Config / Env ----
LOG_LEVEL      = os.getenv("LOG_LEVEL", "INFO").upper()
THREADS        = max(1, int(os.getenv("GFBM_LAB_THREADS", "1")))

# ---- Quadrature defaults ----
QUAD_ABS_TOL   = float(os.getenv("GFBM_LAB_QUAD_ABS_TOL", "1e-10"))
QUAD_REL_TOL   = float(os.getenv("GFBM_LAB_QUAD_REL_TOL", "1e-9"))
QUAD_LIMIT     = int(os.getenv("GFBM_LAB_QUAD_LIMIT", "512"))
QUAD_RULE      = os.getenv("GFBM_LAB_QUAD_RULE", "gauss-jacobi").strip().lower()

# ---- Caches ----
CACHE_MAX      = int(os.getenv("GFBM_LAB_CACHE_MAX", "200000"))

# ---- Files ----
OUT_DIR        = os.getenv("GFBM_LAB_OUT_DIR", "out")
META_SUFFIX    = ".meta.json"
