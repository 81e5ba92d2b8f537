import json
import logging
import math
import os
import tempfile
import time
import unittest
import numpy as np
from gfbmlab.cache import MemoCache, clear_all, psi_cache
from gfbmlab.errors import DomainError
from gfbmlab.helpers import divides_all, fmt17, humanize_float, mean_stderr, parse_bool, parse_floats, parse_ints, pmap
from gfbmlab.logging_setup import setup_logging
from gfbmlab.models import VariationStat
from gfbmlab.storage import dumps, load_config_file, paths_csv, write_json, write_meta, write_rows_csv
from gfbmlab.tables import cut, fixed_table

class HelpersTest(unittest.TestCase):
    def test_parsers(self):
        self.assertEqual(parse_ints("2^4, 64,2^8"), [16, 64, 256])
        self.assertEqual(parse_floats("0:1:5"), [0.0, 0.25, 0.5, 0.75, 1.0])
        self.assertEqual(parse_floats("1,2.5"), [1.0, 2.5])
        self.assertTrue(parse_bool("yes")); self.assertFalse(parse_bool("off"))
        for bad in (lambda: parse_ints("2^x"), lambda: parse_floats("a,b"), lambda: parse_bool("maybe")):
            with self.assertRaises(DomainError): bad()

    def test_numbers(self):
        self.assertEqual(float(fmt17(0.1)), 0.1)
        self.assertEqual(humanize_float(float("nan")), "—")
        self.assertEqual(humanize_float(0.22514), "0.2251")
        m, se = mean_stderr([1.0, 2.0, 3.0])
        self.assertEqual(m, 2.0); self.assertAlmostEqual(se, 1 / math.sqrt(3))
        self.assertTrue(math.isnan(mean_stderr([5.0])[1]))
        self.assertTrue(divides_all([4, 16, 64], 64)); self.assertFalse(divides_all([3], 64))

    def test_pmap_keeps_order(self):
        def slow(x):
            time.sleep(0.001 * (5 - x)); return x * x
        self.assertEqual(pmap(slow, range(5), threads=4), [0, 1, 4, 9, 16])
        self.assertEqual(pmap(slow, range(5), threads=1), [0, 1, 4, 9, 16])

class MemoCacheTest(unittest.TestCase):
    def test_hits_and_eviction(self):
        c = MemoCache("t", max_size=2)
        calls = []
        f = lambda k: (lambda: calls.append(k) or k * 10)
        self.assertEqual(c.get_or_compute(1, f(1)), 10)
        self.assertEqual(c.get_or_compute(1, f(1)), 10)
        self.assertEqual((c.hits, c.misses), (1, 1))
        c.get_or_compute(2, f(2)); c.get_or_compute(3, f(3))
        self.assertEqual(len(c), 2)
        c.get_or_compute(1, f(1))
        self.assertEqual(calls, [1, 2, 3, 1])
        c.clear()
        self.assertEqual((len(c), c.hits), (0, 0))

    def test_clear_all(self):
        psi_cache.get_or_compute(("key",), lambda: 1.0)
        clear_all()
        self.assertEqual(len(psi_cache), 0)

class FilesTest(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def test_paths_csv_full_precision(self):
        p = os.path.join(self.dir, "sub", "paths.csv")
        vals = np.array([[0.0, 1 / 3, -2 / 7], [0.0, math.pi, 1e-300]])
        paths_csv(p, np.array([0.0, 0.5, 1.0]), vals)
        data = np.loadtxt(p, delimiter=",", skiprows=1)
        np.testing.assert_array_equal(data[:, 1:].T, vals)

    def test_rows_csv(self):
        p = os.path.join(self.dir, "rows.csv")
        write_rows_csv(p, [dict(p=2.0, regime="critical", n=16), dict(p=0.1, regime="", n=64)])
        with open(p, encoding="utf-8") as f:
            lines = f.read().splitlines()
        self.assertEqual(lines, ["p,regime,n", "2,critical,16", "0.10000000000000001,,64"])
        with self.assertRaises(DomainError): write_rows_csv(p, [])

    def test_json_and_meta(self):
        stat = VariationStat(2.0, 16, 0.5, float("nan"), "critical")
        self.assertEqual(json.loads(dumps(stat))["limit_rho"], "nan")
        p = os.path.join(self.dir, "x.json")
        write_json(p, dict(a=np.arange(3), b=np.float64(0.5)))
        with open(p, encoding="utf-8") as f:
            self.assertEqual(json.load(f), dict(a=[0, 1, 2], b=0.5))
        meta = write_meta(p, dict(command="simulate", threads=2), 7, 1e-12, time.time())
        with open(meta, encoding="utf-8") as f:
            m = json.load(f)
        self.assertEqual((m["seed"], m["threads"], m["jitter"]), (7, 2, 1e-12))
        self.assertEqual(set(m["versions"]), {"gfbmlab", "numpy", "scipy", "python"})

    def test_config_file(self):
        p = os.path.join(self.dir, "a.conf")
        with open(p, "w", encoding="utf-8") as f:
            f.write("# defaults\nquad-rel-tol = 1e-8\n\nalpha=0.7  # region I\n")
        self.assertEqual(load_config_file(p), {"quad_rel_tol": "1e-8", "alpha": "0.7"})
        with open(p, "a", encoding="utf-8") as f:
            f.write("oops\n")
        with self.assertRaises(DomainError): load_config_file(p)
        with self.assertRaises(DomainError): load_config_file(os.path.join(self.dir, "none.conf"))

class TableAndLoggingTest(unittest.TestCase):
    def test_fixed_table(self):
        out = fixed_table(["a", "b"], [[1, "xy"]], [3, 4], ["r", "l"]).splitlines()
        self.assertEqual(out, ["a    b   ", "───  ────", "  1  xy  "])
        self.assertEqual(cut("abcdef", 4), "abc…")
        self.assertTrue(fixed_table(["a"], [], [2], ["l"]).endswith("—"))

    def test_setup_logging_single_handler(self):
        root = logging.getLogger()
        saved = root.handlers[:], root.level
        try:
            setup_logging("DEBUG"); setup_logging("DEBUG")
            self.assertEqual(len(root.handlers), 1)
            self.assertEqual(root.level, logging.DEBUG)
        finally:
            root.handlers[:] = saved[0]; root.setLevel(saved[1])

if __name__ == "__main__":
    unittest.main()
