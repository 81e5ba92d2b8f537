import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stdout
from unittest import mock
from gfbmlab import cli
from gfbmlab.config import META_SUFFIX
from gfbmlab.errors import NumericalError

def run(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(list(argv))
    return code, buf.getvalue()

class ClassifyCommandTest(unittest.TestCase):
    def test_region_one(self):
        code, out = run("classify", "--alpha", "0.7", "--gamma", "0.5")
        self.assertEqual(code, 0)
        res = json.loads(out)
        self.assertEqual(res["region"], "RegionI")
        self.assertAlmostEqual(res["hurst"], 0.95)

    def test_brownian_motion(self):
        code, out = run("classify", "--alpha", "0", "--gamma", "0")
        self.assertEqual(json.loads(out)["region"], "BrownianMotion")

    def test_domain_errors_exit_two(self):
        self.assertEqual(run("classify", "--alpha", "0.9", "--gamma", "0.1")[0], 2)
        self.assertEqual(run("classify", "--gamma", "0.1")[0], 2)
        self.assertEqual(run("simulate", "--alpha", "0", "--gamma", "0", "--kind", "spline")[0], 2)
        self.assertEqual(run("frobnicate")[0], 2)

    def test_numerical_error_exits_three(self):
        def boom(rc, args, started): raise NumericalError("Gram matrix not positive definite", estimate=-1e-3)
        with mock.patch.dict(cli.COMMANDS, {"classify": boom}):
            self.assertEqual(run("classify", "--alpha", "0", "--gamma", "0")[0], 3)

    def test_unexpected_error_exits_one(self):
        def boom(rc, args, started): raise RuntimeError("disk full")
        with mock.patch.dict(cli.COMMANDS, {"classify": boom}), self.assertLogs("gfbm-lab", "ERROR"):
            self.assertEqual(run("classify", "--alpha", "0", "--gamma", "0")[0], 1)

    def test_help_lists_exit_codes(self):
        code, out = run("--help")
        self.assertEqual(code, 0)
        for piece in ("0 success", "1 unexpected failure", "2 invalid input", "3 numerical failure"):
            self.assertIn(piece, out)

    def test_config_file_and_override(self):
        with tempfile.TemporaryDirectory() as d:
            cfg = os.path.join(d, "run.conf")
            with open(cfg, "w", encoding="utf-8") as f:
                f.write("# region I\nalpha = 0.7\ngamma = 0.5\n")
            code, out = run("classify", "--config", cfg)
            self.assertEqual((code, json.loads(out)["region"]), (0, "RegionI"))
            code, out = run("classify", "--config", cfg, "--alpha", "0.25")
            self.assertAlmostEqual(json.loads(out)["hurst"], 0.5)
            self.assertEqual(run("classify", "--config", os.path.join(d, "missing.conf"))[0], 2)

class FileCommandTest(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def path(self, name):
        return os.path.join(self.dir, name)

    def test_simulate_writes_paths_and_meta(self):
        args = ["simulate", "--alpha", "0.3", "--gamma", "0.2", "--n", "32", "--paths", "5", "--seed", "9"]
        self.assertEqual(run(*args, "--out", self.path("a.csv"))[0], 0)
        with open(self.path("a.csv"), encoding="utf-8") as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "t,path_0,path_1,path_2,path_3,path_4")
        self.assertEqual(len(lines), 34)
        self.assertTrue(all(len(l.split(",")) == 6 for l in lines[1:]))
        with open(self.path("a.csv") + META_SUFFIX, encoding="utf-8") as f:
            meta = json.load(f)
        self.assertEqual(meta["seed"], 9)
        self.assertIn("numpy", meta["versions"])
        run(*args, "--out", self.path("b.csv"))
        with open(self.path("a.csv"), "rb") as fa, open(self.path("b.csv"), "rb") as fb:
            self.assertEqual(fa.read(), fb.read())

    def test_table1_side_b(self):
        self.assertEqual(run("table1", "--side", "b", "--out", self.path("t.csv"))[0], 0)
        with open(self.path("t.csv"), encoding="utf-8") as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "alpha,gamma,H,f,v_formula,v_printed_discrepancy")
        self.assertEqual(len(lines), 7)

    def test_table1_stdout(self):
        code, out = run("table1")
        self.assertEqual(out.splitlines()[0], "alpha,gamma,H,f,v")
        self.assertEqual(len(out.splitlines()), 7)

    def test_vvix_surface(self):
        code, _ = run("vvix-surface", "--H", "0.05", "--t", "0.5", "--gammas", "0,0.5,0.9", "--format", "json",
                      "--out", self.path("s.json"))
        self.assertEqual(code, 0)
        with open(self.path("s.json"), encoding="utf-8") as f:
            rows = json.load(f)
        self.assertEqual(len(rows), 3)
        self.assertEqual(run("vvix-surface", "--H", "0.05")[0], 2)

    def test_wiener_hopf_too_few_nodes(self):
        self.assertEqual(run("wiener-hopf", "--alpha", "0.4", "--gamma", "0.3", "--n", "8",
                             "--out", self.path("w.csv"))[0], 2)

    def test_wiener_hopf_rows(self):
        self.assertEqual(run("wiener-hopf", "--alpha", "0.4", "--gamma", "0.3", "--n", "16",
                             "--out", self.path("w.csv"))[0], 0)
        with open(self.path("w.csv"), encoding="utf-8") as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "s,t,L,ell")
        self.assertEqual(len(lines), 1 + 16 * 17 // 2)

    def test_price_bachelier(self):
        code, _ = run("price", "--alpha", "0.45", "--gamma", "0.3", "--mode", "bachelier", "--levels", "2,4,8",
                      "--paths", "5", "--out", self.path("p.json"))
        self.assertEqual(code, 0)
        with open(self.path("p.json"), encoding="utf-8") as f:
            rep = json.load(f)
        self.assertEqual(rep["model"], "bachelier")
        self.assertEqual(rep["levels"], [2, 4, 8])
        self.assertEqual(rep["n_paths"], 5)

if __name__ == "__main__":
    unittest.main()
