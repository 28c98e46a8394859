import hashlib

import pytest

from backsim.cli import ExperimentSpec, main, parse_args, run


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


SMALL_CONFIG = (
    "pb_power_dbm_sweep = 25, 40\n"
    "num_slots = 30\n"
    "warmup_slots = 5\n"
)


@pytest.fixture
def small_config_file(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CONFIG)
    return path


class TestParseArgs:
    def test_defaults(self):
        spec = parse_args(["--experiment", "fig3a", "--out", "r.csv"])
        assert spec == ExperimentSpec(name="fig3a", config_path=None, out_path="r.csv",
                                      seed_override=None, trials_override=None)

    def test_all_flags(self):
        spec = parse_args(["--experiment", "thss", "--config", "c.cfg", "--out", "o.csv",
                           "--seed", "7", "--trials", "1000"])
        assert spec.name == "thss" and spec.config_path == "c.cfg"
        assert spec.seed_override == 7 and spec.trials_override == 1000

    def test_unknown_experiment_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as err:
            parse_args(["--experiment", "bogus", "--out", "r.csv"])
        assert err.value.code == 2

    def test_unknown_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as err:
            parse_args(["--experiment", "fig3a", "--out", "r.csv", "--frobnicate"])
        assert err.value.code == 2

    def test_malformed_numeric_is_usage_error(self):
        with pytest.raises(SystemExit) as err:
            parse_args(["--experiment", "fig3a", "--out", "r.csv", "--seed", "abc"])
        assert err.value.code == 2


class TestRun:
    def test_interference_count_table(self, tmp_path):
        out = tmp_path / "counts.csv"
        spec = ExperimentSpec("interference_count", None, str(out))
        assert run(spec) == 0
        assert out.read_text().splitlines() == [
            "k,components_per_reader", "1,0", "2,2", "5,20", "10,90", "20,380"]

    def test_fig3a_row_count_with_default_sweep(self, tmp_path, capsys):
        # default sweep: 9 power points x 2 kinds = 18 rows
        cfg = tmp_path / "fast.cfg"
        cfg.write_text("num_slots = 25\nwarmup_slots = 5\n")
        out = tmp_path / "fig3a.csv"
        spec = ExperimentSpec("fig3a", str(cfg), str(out), trials_override=2)
        assert run(spec) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 19
        summary = capsys.readouterr().out
        assert "18 rows" in summary and str(out) in summary

    def test_tradeoff_beta_grid(self, tmp_path):
        out = tmp_path / "beta.csv"
        assert run(ExperimentSpec("tradeoff_beta", None, str(out))) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "beta,harvested_fraction,ber"
        betas = [float(l.split(",")[0]) for l in lines[1:]]
        assert betas == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_tradeoff_duty_grid(self, tmp_path):
        out = tmp_path / "duty.csv"
        assert run(ExperimentSpec("tradeoff_duty", None, str(out))) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "alpha,avg_harvest_w,relative_rate"
        assert len(lines) == 7

    def test_thss_rows(self, tmp_path):
        out = tmp_path / "thss.csv"
        assert run(ExperimentSpec("thss", None, str(out), trials_override=2000)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "k,n,trials,empirical_collision,analytic_collision"
        cases = [tuple(map(int, l.split(",")[:2])) for l in lines[1:]]
        assert cases == [(2, 10), (10, 100), (50, 10)]

    def test_dyadic_rows(self, tmp_path):
        out = tmp_path / "dyadic.csv"
        assert run(ExperimentSpec("dyadic", None, str(out), trials_override=100_000)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "tag_antennas,rx_antennas,snr_db,ber"
        ells = {int(l.split(",")[0]) for l in lines[1:]}
        assert ells == {1, 2}

    def test_unreadable_config_fails_cleanly(self, tmp_path, capsys):
        spec_argv = ["--experiment", "fig3a", "--config", str(tmp_path / "missing.cfg"),
                     "--out", str(tmp_path / "o.csv")]
        assert main(spec_argv) == 1
        assert "error" in capsys.readouterr().err


class TestDeterminism:
    def test_seeded_reruns_are_byte_identical(self, tmp_path, small_config_file):
        digests = {}
        for name, trials in [("fig3a", 2), ("thss", 2000), ("dyadic", 100_000),
                             ("tradeoff_beta", None), ("interference_count", None)]:
            pair = []
            for attempt in ("a", "b"):
                out = tmp_path / f"{name}_{attempt}.csv"
                cfg = str(small_config_file) if name in ("fig3a",) else None
                assert run(ExperimentSpec(name, cfg, str(out), seed_override=42,
                                          trials_override=trials)) == 0
                pair.append(_digest(out))
            digests[name] = pair
        for name, (a, b) in digests.items():
            assert a == b, f"{name} output changed between identical runs"

    def test_config_file_never_mutated(self, tmp_path, small_config_file):
        before = _digest(small_config_file)
        out = tmp_path / "o.csv"
        run(ExperimentSpec("fig3a", str(small_config_file), str(out), trials_override=1))
        assert _digest(small_config_file) == before
