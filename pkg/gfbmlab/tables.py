from typing import Dict, List, Sequence
from .helpers import humanize_float

def cut(s, w):
    s = str(s).replace("\n", " ").strip()
    return s if len(s) <= w else s[:max(1, w - 1)] + "…"

def cell(v, w, a):
    s = cut(v, w)
    return s.rjust(w) if a == "r" else (s.center(w) if a == "c" else s.ljust(w))

def fixed_table(headers: Sequence[str], rows: List[Sequence], widths: Sequence[int], aligns: Sequence[str]) -> str:
    head = "  ".join(cell(h, w, "l") for h, w in zip(headers, widths))
    sep = "  ".join("─" * w for w in widths)
    body = "\n".join("  ".join(cell(v, w, a) for v, w, a in zip(r, widths, aligns)) for r in rows) or "—"
    return f"{head}\n{sep}\n{body}"

# VVIX reference table; side b shows the formula value and the printed-value note
def table1_table(rows: List[Dict]) -> str:
    side_b = rows and "v_formula" in rows[0]
    headers = ["alpha", "gamma", "H", "f", "v"] + (["note"] if side_b else [])
    widths = [7, 6, 5, 8, 8] + ([40] if side_b else [])
    aligns = ["r", "r", "r", "r", "r"] + (["l"] if side_b else [])
    out = []
    for r in rows:
        line = [f"{r['alpha']:g}", f"{r['gamma']:g}", f"{r['H']:.2f}", humanize_float(r["f"]),
                humanize_float(r["v_formula"] if side_b else r["v"])]
        if side_b: line.append(r["v_printed_discrepancy"] or "—")
        out.append(line)
    return fixed_table(headers, out, widths, aligns)

def sweep_table(rows: List[Dict]) -> str:
    headers = ["p", "n", "mean", "stderr", "expected", "regime"]
    widths = [6, 7, 12, 10, 12, 13]
    aligns = ["r", "r", "r", "r", "r", "l"]
    out = [[f"{r['p']:g}", r["n"], f"{r['mean']:.6g}", f"{r['stderr']:.2g}", f"{r['expected']:.6g}", r["regime"]]
           for r in rows]
    return fixed_table(headers, out, widths, aligns)

def classify_table(rc) -> str:
    headers = ["field", "value"]
    rows = [[k, v] for k, v in vars(rc).items()]
    return fixed_table(headers, rows, [20, 16], ["l", "l"])
