import math
import pathlib
import tempfile
import unittest

from pysecrecy.config import replace, validate
from pysecrecy.exceptions import OutputError
from pysecrecy.report import (
    COLUMNS,
    SecrecyReport,
    analytic_columns,
    emit_plotdata,
    make_row,
    read_csv,
    write_atomic,
)
from pysecrecy.training import make_pilots

from tests.helpers import baseline_config


class TestSecrecyRow(unittest.TestCase):
    def test_echo(self):
        cfg = validate(baseline_config(beta=(1.0, 2.0, 3.0, 4.0)))
        row = make_row(cfg, 2, "phi", 0.5, rate_analytic=3.0)

        self.assertEqual(row.mt, 3)
        self.assertEqual(row.beta_k, 3.0)
        self.assertEqual(row.t0, 5)
        self.assertEqual(row.p_tau, cfg.p_tau)
        self.assertEqual(row.pilot_design, "time_orthogonal")
        self.assertEqual(row.rate_analytic, 3.0)
        self.assertIsNone(row.rate_mc)

    def test_secrecy_band(self):
        cfg = validate(baseline_config())
        row = make_row(cfg, 0, stderr_rate=0.3, stderr_Ce=0.4)

        self.assertAlmostEqual(row.secrecy_band(), 0.5 * 496 / 500, 12)
        self.assertIsNone(make_row(cfg, 0, stderr_rate=0.3).secrecy_band())


class TestAnalyticColumns(unittest.TestCase):
    def test_baseline(self):
        cfg = validate(baseline_config())
        columns = analytic_columns(cfg, make_pilots(cfg), 0)

        self.assertAlmostEqual(columns["Ce_bound"], 1.0238, places=3)
        self.assertGreater(columns["rate_analytic"], 0.0)
        self.assertGreater(columns["secrecy_analytic"], 0.0)
        self.assertLess(
            columns["secrecy_analytic"], columns["rate_analytic"] * 496 / 500
        )

    def test_bound_undefined(self):
        with self.assertLogs("pysecrecy", "WARNING"):
            cfg = validate(baseline_config(N=8, N_E=4))
            columns = analytic_columns(cfg, make_pilots(cfg), 0)

        self.assertIn("rate_analytic", columns)
        self.assertNotIn("Ce_bound", columns)
        self.assertNotIn("secrecy_analytic", columns)

    def test_no_an(self):
        cfg = validate(baseline_config(phi=1.0))

        with self.assertLogs("pysecrecy.report", "WARNING"):
            columns = analytic_columns(cfg, make_pilots(cfg), 0)

        self.assertEqual(columns["Ce_bound"], math.inf)
        self.assertEqual(columns["secrecy_analytic"], 0.0)


class TestSecrecyReport(unittest.TestCase):
    def setUp(self):
        self.cfg = validate(baseline_config())
        self.report = SecrecyReport(
            [
                make_row(self.cfg, 0, rate_analytic=1.0 / 3.0, M=200),
                make_row(self.cfg, 1, rate_analytic=2.0),
            ]
        )

    def test_container(self):
        self.assertEqual(len(self.report), 2)
        self.assertEqual(self.report[1].mt, 2)
        self.assertEqual([row.mt for row in self.report], [1, 2])

        self.report.append(make_row(self.cfg, 2))
        self.report.extend([make_row(self.cfg, 3)])

        self.assertEqual(len(self.report.rows), 4)

    def test_csv_text(self):
        print("Testing CSV layout")
        lines = self.report.to_csv().splitlines()

        self.assertEqual(lines[0], ",".join(COLUMNS))
        self.assertEqual(len(lines), 3)

        cells = dict(zip(COLUMNS, lines[1].split(",")))

        self.assertEqual(cells["sweep_variable"], "")
        self.assertEqual(cells["sweep_value"], "")
        self.assertEqual(cells["mt"], "1")
        self.assertEqual(cells["N"], "128")
        self.assertEqual(cells["rate_analytic"], "0.333333333")
        self.assertEqual(cells["rate_mc"], "")
        self.assertEqual(cells["M"], "200")
        self.assertEqual(cells["pilot_design"], "time_orthogonal")

    def test_read_back(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = self.report.write_csv(pathlib.Path(tmp) / "a" / "r.csv")
            rows = read_csv(path)

            self.assertEqual(list(rows[0]), list(COLUMNS))
            self.assertEqual(rows[1]["rate_analytic"], "2")
            self.assertEqual(rows[1]["mt"], "2")
            self.assertEqual(
                [p.name for p in path.parent.iterdir()], ["r.csv"]
            )

    def test_unwritable(self):
        with tempfile.TemporaryDirectory() as tmp:
            blocker = pathlib.Path(tmp) / "file"
            blocker.write_text("x")

            with self.assertRaises(OutputError):
                write_atomic(blocker / "r.csv", "text")


class TestPlotData(unittest.TestCase):
    def _report(self, mts=(0,)):
        report = SecrecyReport()

        for N_o in (1, 128):
            for i in range(10):
                phi = 0.1 * (i + 1) if i < 9 else 0.99
                cfg = validate(replace(baseline_config(N_o=N_o), phi=phi))

                for k in mts:
                    report.append(
                        make_row(
                            cfg,
                            k,
                            "phi",
                            phi,
                            secrecy_analytic=1.0,
                            secrecy_mc=0.1,
                            stderr_rate=0.3,
                            stderr_Ce=0.4,
                        )
                    )

        return report

    def test_files(self):
        print("Testing plot data files")
        with tempfile.TemporaryDirectory() as tmp:
            paths = emit_plotdata(self._report(), tmp)

            self.assertEqual(
                sorted(p.name for p in paths),
                ["plot_No128_K4.dat", "plot_No1_K4.dat"],
            )

            lines = paths[0].read_text().splitlines()

            self.assertEqual(len(lines), 12)
            self.assertEqual(lines[0], "# N_o=1 K=4 mt=1 x=phi")
            self.assertTrue(lines[1].startswith("# x secrecy_analytic"))

            values = [float(v) for v in lines[2].split()]

            self.assertEqual(len(values), 5)
            self.assertAlmostEqual(values[0], 0.1)
            # lower edge clipped at zero
            self.assertEqual(values[3], 0.0)
            self.assertAlmostEqual(values[4], 0.1 + 2 * 0.5 * 496 / 500, 6)

    def test_per_mt_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            paths = emit_plotdata(self._report(mts=(0, 1)), tmp)

            self.assertEqual(len(paths), 4)
            self.assertIn("plot_No1_K4_mt2.dat", [p.name for p in paths])

    def test_missing_values(self):
        cfg = validate(baseline_config())
        report = SecrecyReport([make_row(cfg, 0, secrecy_analytic=1.5)])

        with tempfile.TemporaryDirectory() as tmp:
            (path,) = emit_plotdata(report, tmp)

            self.assertEqual(
                path.read_text().splitlines()[2], "0.5 1.5 nan nan nan"
            )

    def test_empty(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ValueError):
                emit_plotdata(SecrecyReport(), tmp)


if __name__ == "__main__":
    unittest.main()
