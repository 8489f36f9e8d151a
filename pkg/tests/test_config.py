import pathlib
import tempfile
import unittest

from pysecrecy.config import (
    PilotDesign,
    auto_t_grid,
    format_config,
    load_config,
    parse_config,
    power_split,
    replace,
    slot_weights,
    validate,
)
from pysecrecy.exceptions import ConfigError

from tests.helpers import baseline_config

BASELINE_TEXT = """
# 128 antennas, 4 users, 6 degree phase noise
N = 128
K = 4
N_E = 4
N_o = 1
B = 4
T = 500
P_T_dB = 10
phi = 0.5
p_tau = auto
sigma_psi_deg = 6
sigma_phi_deg = 6
beta = 1,1,1,1
beta_E = 1
pilot_design = time_orthogonal
trials = 5000
seed = 1
t0 = auto
t_grid = auto
"""


class TestValidate(unittest.TestCase):
    def test_baseline_defaults(self):
        cfg = validate(baseline_config())

        self.assertAlmostEqual(cfg.P_T, 10.0, 12)
        self.assertAlmostEqual(cfg.p_tau, 2.5, 12)
        self.assertEqual(cfg.t0, 5)
        self.assertEqual(cfg.L, 124)
        self.assertEqual(cfg.data_slots, 496)
        self.assertEqual(cfg.antennas_per_lo, 128)
        self.assertAlmostEqual(cfg.p, 1.25, 12)
        self.assertAlmostEqual(cfg.q, 0.0403226, 7)
        self.assertEqual(cfg.warnings, ())

    def test_raw_fields_delegate(self):
        cfg = validate(baseline_config())

        self.assertEqual(cfg.N, 128)
        self.assertEqual(cfg.pilot_design, PilotDesign.TIME_ORTHOGONAL)
        self.assertEqual(cfg.beta, (1.0, 1.0, 1.0, 1.0))

        with self.assertRaises(AttributeError):
            cfg.not_a_field

    def test_power_split(self):
        print("Testing phi=1 gives all power to data")
        p, q = power_split(baseline_config(phi=1.0))

        self.assertAlmostEqual(p, 2.5, 12)
        self.assertEqual(q, 0.0)

        print("Testing N=8 gives p=q")
        p, q = power_split(baseline_config(N=8, N_E=2))

        self.assertAlmostEqual(p, 1.25, 12)
        self.assertAlmostEqual(q, 1.25, 12)

    def test_power_budget(self):
        for phi in (0.01, 0.3, 0.77, 1.0):
            cfg = validate(baseline_config(phi=phi))

            self.assertAlmostEqual(cfg.K * cfg.p + cfg.L * cfg.q, cfg.P_T, 12)

    def test_idempotent(self):
        cfg = validate(baseline_config())

        self.assertEqual(validate(cfg), cfg)

    def test_lo_divisibility(self):
        with self.assertRaises(ConfigError) as ctx:
            validate(baseline_config(N_o=3))

        self.assertIn("N mod N_o ≠ 0", ctx.exception.violations)

    def test_eve_bound_warning(self):
        with self.assertLogs("pysecrecy.config", "WARNING") as logs:
            cfg = validate(baseline_config(N=8, N_E=5))

        self.assertIn("L=4 ≤ N_E, eve upper bound undefined", logs.output[0])
        self.assertFalse(cfg.eve_bound_defined)

        with self.assertRaises(ConfigError):
            validate(baseline_config(N=8, N_E=5), require_eve_bound=True)

    def test_power_split_keeps_validated(self):
        print("Testing a validated config is not checked twice")
        with self.assertLogs("pysecrecy.config", "WARNING"):
            cfg = validate(baseline_config(N=8, N_E=5, phi=0.5))

        with self.assertNoLogs("pysecrecy.config", "WARNING"):
            p, q = power_split(cfg)

        self.assertEqual((p, q), (cfg.p, cfg.q))

    def test_collects_every_violation(self):
        with self.assertRaises(ConfigError) as ctx:
            validate(baseline_config(T=4, phi=0.0, beta=(1.0, 1.0)))

        violations = ctx.exception.violations

        self.assertEqual(len(violations), 3)
        self.assertIn("T = 4 must exceed B = 4", violations)

    def test_bad_t0(self):
        with self.assertRaises(ConfigError):
            validate(baseline_config(t0=3))

        self.assertEqual(validate(baseline_config(t0=9)).t0, 9)

    def test_pilot_length(self):
        with self.assertRaises(ConfigError):
            validate(baseline_config(B=3))


class TestSlotGrid(unittest.TestCase):
    def test_auto_grid(self):
        grid = auto_t_grid(4, 500)
        weights = slot_weights(grid, 4, 500)

        self.assertEqual(len(grid), 10)
        self.assertEqual(grid[0], 29)
        self.assertEqual(weights, (50,) * 6 + (49,) * 4)
        self.assertEqual(sum(weights), 496)

    def test_short_block(self):
        grid = auto_t_grid(4, 8)

        self.assertEqual(grid, (5, 6, 7, 8))
        self.assertEqual(slot_weights(grid, 4, 8), (1, 1, 1, 1))

    def test_explicit_grid(self):
        self.assertEqual(slot_weights((5, 10), 4, 12), (3, 5))

        print("Testing ties go to the earlier grid point")
        self.assertEqual(slot_weights((5, 7), 4, 8), (2, 2))

    def test_explicit_grid_sorted(self):
        cfg = validate(baseline_config(T=12, t_grid=(10, 5, 10)))

        self.assertEqual(cfg.t_grid, (5, 10))
        self.assertEqual(cfg.t_weights, (3, 5))

    def test_grid_outside_data_phase(self):
        with self.assertRaises(ConfigError):
            validate(baseline_config(T=12, t_grid=(4, 5)))


class TestConfigText(unittest.TestCase):
    def test_parse(self):
        cfg = parse_config(BASELINE_TEXT)

        self.assertEqual(cfg.N, 128)
        self.assertEqual(cfg.beta, (1.0, 1.0, 1.0, 1.0))
        self.assertIsNone(cfg.p_tau)
        self.assertIsNone(cfg.t_grid)
        self.assertEqual(cfg.xi_UL, 1.0)
        self.assertEqual(cfg.seed, 1)

    def test_round_trip(self):
        cfg = replace(parse_config(BASELINE_TEXT), t_grid=(5, 100), xi_DL=0.5)

        self.assertEqual(parse_config(format_config(cfg)), cfg)

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config(BASELINE_TEXT + "N_e = 4\n")

        self.assertIn("unknown key 'N_e'", str(ctx.exception))

    def test_duplicate_key(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config(BASELINE_TEXT + "K = 8\n")

        self.assertIn("duplicate key 'K'", str(ctx.exception))

    def test_missing_key(self):
        text = BASELINE_TEXT.replace("seed = 1\n", "")

        with self.assertRaises(ConfigError) as ctx:
            parse_config(text)

        self.assertIn("missing required keys: seed", str(ctx.exception))

    def test_bad_value(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config(BASELINE_TEXT.replace("N = 128", "N = many"))

        self.assertIn("N:", str(ctx.exception))

    def test_load(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = pathlib.Path(tmp) / "baseline.conf"
            path.write_text(BASELINE_TEXT, encoding="utf-8")

            self.assertEqual(load_config(path), parse_config(BASELINE_TEXT))

            with self.assertRaises(ConfigError):
                load_config(pathlib.Path(tmp) / "missing.conf")


if __name__ == "__main__":
    unittest.main()
