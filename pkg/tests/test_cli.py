import math

import pytest

from ruinalarm import cli
from ruinalarm.cli import (
    ConfigError,
    SurfaceCache,
    build_model,
    config_hash,
    main,
    parse_config,
    run_experiment,
    serialize_config,
)
from ruinalarm.model import Exponential, Pareto
from ruinalarm.simulate import estimate_psi_surface, time_grid

EX1 = """\
# exponential claims, no loading
[model]
claims = exponential
rho = 0.5
lambda = 20
premium_rate = 25
u0 = 15

[alarm]
alpha = 0.4
beta = 0.025
d = 1.0
injection_fraction = 0.1
horizon = 3
max_alarms = 3

[simulation]
n_paths = 5000
master_seed = 3
horizon = 3
min_survivors = 500

[compare]
rates = 0, 0.1, inf
report_times = 0.1, 0.5, 1

[output]
formats = csv
"""

EX2_SMALL = """\
[model]
claims = pareto
rho = 1.0
kappa = 0.95
lambda = 20
premium_rate = 40
u0 = 50

[alarm]
alpha = 0.45
beta = 0.225
d = 1.0
times = 0.29, 0.58, 0.91, 1.28
injections = 5, 5, 5, 5
horizon = 4

[simulation]
n_paths = 6000
master_seed = 2
horizon = 4

[compare]
rates = 0, 0.1, 0.3, 0.5, 1.0, 1.5, 2.0, 5.0, inf
report_times = 0.1, 1, 3
bound_times = 0.53, 2.0
capital_step = 2

[output]
formats = csv, svg
"""


def errors_of(text, command=None):
    with pytest.raises(ConfigError) as info:
        parse_config(text, command)
    return info.value.errors


class TestParse:
    def test_example_config(self):
        cfg = parse_config(EX1)
        m = build_model(cfg)
        assert m.claims == Exponential(0.5)
        assert (m.lam, m.premium_rate, m.initial_capital) == (20.0, 25.0, 15.0)
        assert cfg["compare"]["rates"] == (0.0, 0.1, math.inf)
        assert cfg["alarm"]["grid_dt"] == 0.01

    def test_round_trip(self):
        """Serialising and re-parsing gives the same config and text."""
        cfg = parse_config(EX1)
        text = serialize_config(cfg)
        again = parse_config(text)
        assert again == cfg
        assert serialize_config(again) == text

    def test_hash_ignores_output_and_workers(self):
        cfg = parse_config(EX1)
        assert config_hash(cfg) == config_hash(cfg.with_value("simulation", "workers", 8))
        assert config_hash(cfg) == config_hash(cfg.with_value("output", "directory", "elsewhere"))
        assert config_hash(cfg) != config_hash(cfg.with_value("simulation", "master_seed", 4))

    def test_alpha_out_of_range(self):
        errs = errors_of(EX1.replace("alpha = 0.4", "alpha = 1.2"))
        assert len(errs) == 1
        assert errs[0].startswith("line 10:") and "alpha" in errs[0]

    def test_injection_conflict(self):
        errs = errors_of(EX1.replace("injection_fraction = 0.1", "injection_fraction = 0.1\ninjections = 1, 2"))
        assert any("injection_fraction" in e and "injections" in e for e in errs)

    def test_all_errors_reported(self):
        """Several problems are listed together, each with its line."""
        bad = EX1.replace("rho = 0.5", "rho = -1").replace("lambda = 20", "lamda = 20").replace(
            "[output]", "[outptu]")
        errs = errors_of(bad)
        assert any(e.startswith("line 4:") and "rho" in e for e in errs)
        assert any("unknown key 'lamda'" in e for e in errs)
        assert any("missing required key 'lambda'" in e for e in errs)
        assert any("unknown section [outptu]" in e for e in errs)

    def test_claim_specific_keys(self):
        errs = errors_of(EX1.replace("rho = 0.5", "rho = 0.5\nkappa = 2"))
        assert any("'kappa' does not apply to exponential" in e for e in errs)
        errs = errors_of(EX2_SMALL.replace("kappa = 0.95\n", ""))
        assert any("pareto claims need 'kappa'" in e for e in errs)

    def test_times_and_injections_length(self):
        errs = errors_of(EX2_SMALL.replace("injections = 5, 5, 5, 5", "injections = 5, 5"))
        assert any("differ in length" in e for e in errs)

    def test_missing_section_for_command(self):
        text = EX1.split("[compare]")[0]
        parse_config(text, "alarm")
        errs = errors_of(text, "compare")
        assert any("needs a [compare] section" in e for e in errs)

    def test_command_line(self):
        cfg = parse_config("command = alarm\n" + EX1)
        assert cfg.command == "alarm"
        errs = errors_of("command = alarm\n" + EX1, "compare")
        assert any("declares command 'alarm'" in e for e in errs)
        errs = errors_of("command = fly\n" + EX1)
        assert errs[0].startswith("line 1: command must be one of")


class TestRun:
    def run(self, tmp_path, text, command, name="out", **kw):
        cfg = parse_config(text, command)
        out = tmp_path / name
        lines = []
        kw.setdefault("use_cache", False)
        status = run_experiment(cfg, command, out, echo=lines.append, **kw)
        return status, out, lines

    def test_ruin_dist(self, tmp_path):
        status, out, lines = self.run(tmp_path, EX1.replace("formats = csv", "formats = csv, svg"), "ruin-dist")
        assert status == 0
        text = (out / "ruin_cdf.csv").read_text()
        assert text.startswith("# ruinalarm 0.1.0 command=ruin-dist config_sha256=")
        assert text.splitlines()[1] == "t,psi,stderr"
        assert (out / "ruin_cdf.svg").read_text().startswith("<svg")
        assert (out / "ruin_times.svg").exists()
        assert lines[0].startswith("ruin-dist: psi(u0=15")

    def test_alarm(self, tmp_path):
        status, out, lines = self.run(tmp_path, EX1, "alarm")
        assert status == 0
        assert len(lines) == 1 and lines[0].startswith("alarm: At(")
        # the golden value is 0.11; 5000 paths leave a few grid steps of noise
        assert abs(float(lines[0][10:-1]) - 0.11) <= 0.03
        assert len((out / "alarm_times.csv").read_text().splitlines()) == 3

    def test_alarm_system(self, tmp_path):
        status, out, lines = self.run(tmp_path, EX1, "alarm-system")
        assert status == 0
        rows = (out / "alarm_times.csv").read_text().splitlines()[2:]
        k = int(lines[-1].split()[0])
        assert len(rows) == k >= 1
        assert len(lines) == k + 1
        times = [float(r.split(",")[1]) for r in rows]
        assert times == sorted(times)

    def test_compare_columns(self, tmp_path):
        """Survival table layout: one survival and one gap column per rate."""
        status, out, _ = self.run(tmp_path, EX2_SMALL, "compare")
        assert status == 0
        lines = (out / "survival.csv").read_text().splitlines()
        cols = lines[2].split(",")
        assert cols[:3] == ["t", "s_alarm", "s_noalarm_r0"]
        assert len(cols) == 2 + 2 * 9 and cols[-1] == "delta_rinf"
        assert [r.split(",")[0] for r in lines[3:]] == ["0.10", "1.00", "3.00"]
        assert "r0.1=68.5397" in lines[1]
        assert (out / "survival.svg").exists()

    def test_bounds_and_cache(self, tmp_path, monkeypatch):
        """A warm cache returns the stored surface and identical files."""
        monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path / "cache"))
        s1, out1, l1 = self.run(tmp_path, EX2_SMALL, "bounds", "a", use_cache=True)
        s2, out2, l2 = self.run(tmp_path, EX2_SMALL, "bounds", "b", use_cache=True)
        assert s1 == s2 == 0
        assert l1[-1] == "surface cache miss" and l2[-1] == "surface cache hit"
        assert (out1 / "bounds.csv").read_bytes() == (out2 / "bounds.csv").read_bytes()
        rows = (out1 / "bounds.csv").read_text().splitlines()
        assert any(r.startswith("inf,5,npc_violated,lower,0.0000") for r in rows)
        assert any(",prop1_upper,upper," in r for r in rows)

    def test_analytic_check(self, tmp_path):
        text = EX1.replace("premium_rate = 25", "premium_rate = 15").replace("lambda = 20", "lambda = 5").replace(
            "u0 = 15", "u0 = 5")
        status, out, lines = self.run(tmp_path, text, "analytic-check")
        assert status == 0
        rows = (out / "analytic_check.csv").read_text().splitlines()[2:]
        assert len(rows) == 3
        for r in rows:
            assert abs(float(r.split(",")[4])) < 4
            assert r.endswith("exponential-closed-form")

    def test_analytic_check_pareto_fails(self, tmp_path):
        status, _, lines = self.run(tmp_path, EX2_SMALL, "analytic-check")
        assert status == cli.EXIT_RUNTIME
        assert "Pareto" in lines[0]

    def test_worker_count_invariance(self, tmp_path):
        outs = []
        for w in (1, 4):
            _, out, _ = self.run(tmp_path, EX2_SMALL, "compare", f"w{w}", workers=w)
            outs.append((out / "survival.csv").read_bytes())
        assert outs[0] == outs[1]


class TestSurfaceCache:
    def test_round_trip_bit_exact(self, tmp_path):
        from ruinalarm.model import RiskModel

        m = RiskModel(Pareto(1.0, 0.95), 20.0, 40.0, 50.0)
        caps, grid = [0.0, 10.0, 20.0, 50.0], time_grid(1.0)
        cache = SurfaceCache(tmp_path)
        key = SurfaceCache.key(m, caps, grid, 3000, 0, 1.0)
        first, hit1 = cache.get_or_build(key, lambda: estimate_psi_surface(m, caps, grid, 3000, 0))
        second, hit2 = cache.get_or_build(key, lambda: pytest.fail("rebuilt despite cache"))
        assert (hit1, hit2) == (False, True)
        assert (first.psi == second.psi).all() and (first.stderr == second.stderr).all()
        assert key != SurfaceCache.key(m, caps, grid, 3000, 1, 1.0)

    def test_disabled(self, tmp_path):
        cache = SurfaceCache(tmp_path, enabled=False)
        _, hit = cache.get_or_build("k", lambda: None)
        assert not hit and not any(tmp_path.iterdir())


class TestMain:
    def test_config_error_exit(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text(EX1.replace("alpha = 0.4", "alpha = 1.2"))
        assert main(["alarm", "--config", str(path)]) == cli.EXIT_CONFIG
        assert "line 10" in capsys.readouterr().err

    def test_overrides(self, tmp_path, capsys):
        path = tmp_path / "ex1.cfg"
        path.write_text(EX1)
        status = main(["alarm", "--config", str(path), "--out", str(tmp_path / "o"), "--paths", "3000",
                       "--seed", "9", "--no-cache", "--workers", "2"])
        assert status == 0
        assert (tmp_path / "o" / "alarm_times.csv").exists()
        assert main(["alarm", "--config", str(path), "--paths", "0"]) == cli.EXIT_CONFIG
        assert "--paths" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["alarm", "--config", str(tmp_path / "nope.cfg")]) == cli.EXIT_CONFIG
