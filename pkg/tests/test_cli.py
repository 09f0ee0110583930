import json
import os

import pytest

from d2deh.cli import (ANALYSIS_COLUMNS, SIMULATION_COLUMNS, ConfigError,
                       cmd_validate, load_config, main)

MINIMAL = """
[scheme]
variant = "ftp"
p_t = 0.1
"""

SWEPT = """
[network]
harvest_efficiency = 0.3

[scheme]
variant = "ftp"

[sweep]
parameter = "p_t"
start = 0.1
stop = 0.3
step = 0.1

[thresholds]
gamma_db = [0.0, 10.0]
"""


def _write(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_load_config_defaults(tmp_path):
    cfg = load_config(_write(tmp_path, MINIMAL))
    assert cfg.network.cell_radius_m == 100.0
    assert cfg.scheme.p_t == 0.1
    assert cfg.sweep is None
    assert cfg.gamma_db == [-5, 0, 5, 10, 15]
    assert cfg.sim.seed == 1


def test_load_config_units(tmp_path):
    cfg = load_config(_write(tmp_path, """
[network]
bs_power_dbm = 30.0
noise_power_dbm = -100.0
[scheme]
variant = "atp"
beta_th_dbm = -70.0
"""))
    assert cfg.network.bs_power_mw == pytest.approx(1000.0)
    assert cfg.network.noise_power_mw == pytest.approx(1e-10)
    assert cfg.scheme.beta_th_mw == pytest.approx(1e-7)


def test_load_config_rejects_unknowns(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "[scheme]\nvariant = 'xtp'\n"))
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "[network]\nfoo = 1.0\n"))
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "[typo_section]\nx = 1\n"))
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, MINIMAL + "[sweep]\nparameter='bogus'\n"
                                               "start=0.0\nstop=1.0\nstep=0.1\n"))
    # Sweeping the ATP threshold under the FTP scheme is inconsistent.
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, MINIMAL + "[sweep]\nparameter='beta_th_dbm'\n"
                                               "start=-80.0\nstop=-60.0\nstep=5.0\n"))


def test_analyze_csv_schema(tmp_path):
    out = str(tmp_path / "out.csv")
    rc = main(["analyze", "--config", _write(tmp_path, SWEPT), "--out", out])
    assert rc == 0
    lines = open(out).read().splitlines()
    assert lines[0] == ",".join(ANALYSIS_COLUMNS)
    # 3 sweep points x 2 thresholds.
    assert len(lines) == 1 + 3 * 2
    first = dict(zip(ANALYSIS_COLUMNS, lines[1].split(",")))
    assert first["sweep_param"] == "p_t"
    assert float(first["sweep_value"]) == 0.1
    assert 0.0 < float(first["pi_o"]) < 1.0
    # Resolved-config sidecar records defaults and the seed.
    meta = json.load(open(out + ".meta.json"))
    assert meta["sim"]["seed"] == 1
    assert meta["network"]["cell_radius_m"] == 100.0


def test_simulate_csv_schema(tmp_path):
    cfg = _write(tmp_path, MINIMAL + """
[sim]
slots = 60
burn_in = 10
trials = 2
[thresholds]
gamma_db = [0.0]
""")
    out = str(tmp_path / "sim.csv")
    rc = main(["simulate", "--config", cfg, "--out", out, "--seed", "5"])
    assert rc == 0
    lines = open(out).read().splitlines()
    assert lines[0] == ",".join(SIMULATION_COLUMNS)
    row = dict(zip(SIMULATION_COLUMNS, lines[1].split(",")))
    assert int(row["n_slot_samples"]) == 100
    assert float(row["pi_o_stderr"]) >= 0.0


def test_seed_changes_simulation(tmp_path):
    cfg = _write(tmp_path, MINIMAL + """
[sim]
slots = 60
burn_in = 10
trials = 2
[thresholds]
gamma_db = [0.0]
""")
    a, b, c = (str(tmp_path / n) for n in ("a.csv", "b.csv", "c.csv"))
    main(["simulate", "--config", cfg, "--out", a, "--seed", "5"])
    main(["simulate", "--config", cfg, "--out", b, "--seed", "5"])
    main(["simulate", "--config", cfg, "--out", c, "--seed", "6"])
    assert open(a, "rb").read() == open(b, "rb").read()
    assert open(a, "rb").read() != open(c, "rb").read()


def test_exit_codes(tmp_path):
    assert main(["analyze", "--config", str(tmp_path / "missing.toml")]) == 2
    bad = _write(tmp_path, "[network]\ncell_radius_m = -5.0\n" + MINIMAL)
    assert main(["analyze", "--config", bad]) == 2


def test_validate_negative_control(tmp_path):
    cfg = load_config(_write(tmp_path, MINIMAL + """
[sim]
slots = 400
burn_in = 100
trials = 4
[thresholds]
gamma_db = [0.0]
[validate]
outage_tol = 0.05
"""))
    assert cmd_validate(cfg) == 0
    # Corrupting the analytical transmitter density must flip the verdict.
    assert cmd_validate(cfg, lambda_t_scale=1.5) == 4
