"""Reproducible experiment runner: analyze, simulate and cross-validate.

Configs are TOML files carrying the paper-facing units (dBm powers, dB
thresholds, meters); everything is converted to the internal linear unit
system once on load. Subcommands:

* ``analyze``  -- evaluate the closed forms, one CSV row per sweep point and
  SINR threshold.
* ``simulate`` -- run the Monte Carlo and emit the same schema plus standard
  errors and sample counts.
* ``validate`` -- run both and check the agreement against declared
  tolerances; the exit code reflects the overall verdict.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 validation
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import analysis, simulator
from .model import ATPConfig, FTPConfig, NetworkParams, SchemeConfig, dbm_to_mw
from .numerics import ChebyshevGrid, ConvergenceError, IntegrationError, \
    chebyshev_grid

SWEEPABLE = ("p_t", "beta_th_dbm", "eta", "lambda_d", "gamma_b_db", "gamma_d_db")

ANALYSIS_COLUMNS = ["sweep_param", "sweep_value", "pi_o", "p_t", "lambda_t",
                    "r_p_m", "W", "gamma_db", "bs_outage", "d2d_outage",
                    "sum_rate"]
SIMULATION_COLUMNS = ANALYSIS_COLUMNS + [
    "pi_o_stderr", "p_t_stderr", "bs_outage_stderr", "d2d_outage_stderr",
    "sum_rate_stderr", "n_slot_samples", "n_pair_samples"]


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    step: float

    def values(self) -> list[float]:
        n = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + i * self.step for i in range(n)]


@dataclass(frozen=True)
class SimSettings:
    slots: int = 2000
    burn_in: int = 500
    trials: int = 4
    seed: int = 1
    field_mode: str = "cell"
    redraw_user_per_slot: bool = False


@dataclass(frozen=True)
class Tolerances:
    pi_o: float = 0.02
    p_t: float = 0.02
    outage: float = 0.03
    sum_rate_rel: float = 0.10


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkParams
    scheme: SchemeConfig
    sweep: SweepSpec | None
    sim: SimSettings
    quadrature_order: int
    rel_tol: float
    gamma_db: list[float]
    csv_path: str
    precision: int
    tolerances: Tolerances

    def grid(self) -> ChebyshevGrid:
        return chebyshev_grid(self.quadrature_order, self.network.cell_radius_m)


_NETWORK_DBM = {
    "bs_power_dbm": "bs_power_mw",
    "cell_user_power_dbm": "cell_user_power_mw",
    "d2d_power_dbm": "d2d_power_mw",
    "sense_power_dbm": "sense_power_mw",
    "noise_power_dbm": "noise_power_mw",
}
_NETWORK_PLAIN = ("cell_radius_m", "d2d_density_per_m2", "pair_distance_m",
                  "path_loss_exponent", "harvest_efficiency", "sense_window",
                  "energy_threshold_mwslots")


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate a TOML experiment config."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    allowed = {"network", "scheme", "sweep", "sim", "quadrature", "thresholds",
               "output", "validate"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    try:
        net_raw = dict(raw.get("network", {}))
        kwargs = {}
        for key, target in _NETWORK_DBM.items():
            if key in net_raw:
                kwargs[target] = dbm_to_mw(float(net_raw.pop(key)))
        for key in _NETWORK_PLAIN:
            if key in net_raw:
                kwargs[key] = float(net_raw.pop(key))
        if net_raw:
            raise ConfigError(f"unknown network keys: {sorted(net_raw)}")
        network = NetworkParams(**kwargs)

        scheme_raw = raw.get("scheme", {})
        variant = scheme_raw.get("variant", "ftp")
        if variant == "ftp":
            scheme: SchemeConfig = FTPConfig(p_t=float(scheme_raw.get("p_t", 0.1)))
        elif variant == "atp":
            scheme = ATPConfig(
                beta_th_mw=dbm_to_mw(float(scheme_raw.get("beta_th_dbm", -72.0))))
        else:
            raise ConfigError(f"unknown scheme variant {variant!r}")

        sweep = None
        if "sweep" in raw:
            s = raw["sweep"]
            sweep = SweepSpec(parameter=s["parameter"], start=float(s["start"]),
                              stop=float(s["stop"]), step=float(s["step"]))
            if sweep.parameter not in SWEEPABLE:
                raise ConfigError(f"unknown sweep parameter {sweep.parameter!r}")
            if sweep.step <= 0.0 or sweep.stop < sweep.start:
                raise ConfigError("sweep bounds must be ordered with step > 0")
            if sweep.parameter == "p_t" and not isinstance(scheme, FTPConfig):
                raise ConfigError("sweeping p_t requires the ftp scheme")
            if sweep.parameter == "beta_th_dbm" and not isinstance(scheme, ATPConfig):
                raise ConfigError("sweeping beta_th_dbm requires the atp scheme")

        sim_raw = raw.get("sim", {})
        sim = SimSettings(
            slots=int(sim_raw.get("slots", 2000)),
            burn_in=int(sim_raw.get("burn_in", 500)),
            trials=int(sim_raw.get("trials", 4)),
            seed=int(sim_raw.get("seed", 1)),
            field_mode=str(sim_raw.get("field_mode", "cell")),
            redraw_user_per_slot=bool(sim_raw.get("redraw_user_per_slot", False)),
        )
        if sim.field_mode not in ("cell", "extended"):
            raise ConfigError(f"unknown field_mode {sim.field_mode!r}")
        if sim.slots <= sim.burn_in or sim.burn_in < 0:
            raise ConfigError("sim requires slots > burn_in >= 0")

        quad = raw.get("quadrature", {})
        thr = raw.get("thresholds", {})
        out = raw.get("output", {})
        tol_raw = raw.get("validate", {})
        tolerances = Tolerances(
            pi_o=float(tol_raw.get("pi_o_tol", 0.02)),
            p_t=float(tol_raw.get("p_t_tol", 0.02)),
            outage=float(tol_raw.get("outage_tol", 0.03)),
            sum_rate_rel=float(tol_raw.get("sum_rate_rel_tol", 0.10)),
        )
        return ExperimentConfig(
            network=network,
            scheme=scheme,
            sweep=sweep,
            sim=sim,
            quadrature_order=int(quad.get("order", 100)),
            rel_tol=float(quad.get("rel_tol", 1e-6)),
            gamma_db=[float(v) for v in thr.get("gamma_db", [-5, 0, 5, 10, 15])],
            csv_path=str(out.get("csv_path", "d2deh_out.csv")),
            precision=int(out.get("precision", 8)),
            tolerances=tolerances,
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def _sweep_points(config: ExperimentConfig):
    """Resolve the sweep into (label, value, params, scheme, gamma_db) points."""
    if config.sweep is None:
        yield "", "", config.network, config.scheme, config.gamma_db
        return
    par = config.sweep.parameter
    for v in config.sweep.values():
        params, scheme, gammas = config.network, config.scheme, config.gamma_db
        if par == "p_t":
            scheme = FTPConfig(p_t=v)
        elif par == "beta_th_dbm":
            scheme = ATPConfig(beta_th_mw=dbm_to_mw(v))
        elif par == "eta":
            params = replace(params, harvest_efficiency=v)
        elif par == "lambda_d":
            params = replace(params, d2d_density_per_m2=v)
        elif par in ("gamma_b_db", "gamma_d_db"):
            gammas = [v]
        yield par, v, params, scheme, gammas


def _fmt(value, precision: int) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.{precision}g}"


def _write_csv(path: str, columns: list[str], rows: list[dict],
               precision: int) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c], precision) for c in columns))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_meta(config: ExperimentConfig, out_path: str) -> None:
    """Sidecar with the fully resolved config, defaults and seed included."""
    resolved = dataclasses.asdict(config)
    resolved["scheme_variant"] = ("ftp" if isinstance(config.scheme, FTPConfig)
                                  else "atp")
    with open(out_path + ".meta.json", "w") as fh:
        json.dump(resolved, fh, indent=2, sort_keys=True, default=str)


def _report_rows(label, value, derived, report, gammas, mode) -> list[dict]:
    rows = []
    for i, gdb in enumerate(gammas):
        row = {
            "sweep_param": label, "sweep_value": value,
            "pi_o": derived.operable_prob, "p_t": derived.transmit_prob,
            "lambda_t": derived.active_density_per_m2,
            "r_p_m": derived.protection_radius_m, "W": derived.w_constant,
            "gamma_db": gdb,
            "bs_outage": report.bs_outage.probabilities[i],
            "d2d_outage": report.d2d_outage.probabilities[i],
            "sum_rate": report.sum_rate,
        }
        if mode == "simulation":
            row.update({
                "pi_o_stderr": report.pi_o_stderr,
                "p_t_stderr": report.p_t_stderr,
                "bs_outage_stderr": report.bs_outage_stderr[i],
                "d2d_outage_stderr": report.d2d_outage_stderr[i],
                "sum_rate_stderr": report.sum_rate_stderr,
                "n_slot_samples": report.n_slot_samples,
                "n_pair_samples": report.n_pair_samples,
            })
        rows.append(row)
    return rows


def analyze_point(params: NetworkParams, scheme: SchemeConfig,
                  gamma_db: list[float], grid: ChebyshevGrid,
                  rel_tol: float = 1e-6) -> analysis.MetricsReport:
    """All analytical metrics for one parameter point."""
    derived = analysis.scheme_derived(params, scheme)
    gammas = [10.0 ** (g / 10.0) for g in gamma_db]
    bs = np.array([analysis._bs_outage(params, derived.active_density_per_m2,
                                       g, grid) for g in gammas])
    d2d = np.array([analysis.d2d_outage(params, scheme, derived, g, grid)
                    for g in gammas])
    rate = analysis.sum_rate(params, scheme, derived, grid, rel_tol)
    return analysis.MetricsReport(
        mode="analysis", derived=derived,
        bs_outage=analysis.OutageCurve(np.asarray(gammas), bs),
        d2d_outage=analysis.OutageCurve(np.asarray(gammas), d2d),
        sum_rate=rate)


def cmd_analyze(config: ExperimentConfig, out_path: str) -> int:
    grid = config.grid()
    rows = []
    for label, value, params, scheme, gammas in _sweep_points(config):
        report = analyze_point(params, scheme, gammas, grid, config.rel_tol)
        rows.extend(_report_rows(label, value, report.derived, report, gammas,
                                 "analysis"))
    _write_csv(out_path, ANALYSIS_COLUMNS, rows, config.precision)
    _write_meta(config, out_path)
    print(f"analyze: wrote {len(rows)} rows to {out_path}")
    return 0


def cmd_simulate(config: ExperimentConfig, out_path: str, threads: int = 1) -> int:
    rows = []
    for label, value, params, scheme, gammas in _sweep_points(config):
        lin = [10.0 ** (g / 10.0) for g in gammas]
        report = simulator.estimate_metrics(
            params, scheme, config.sim.slots, config.sim.burn_in,
            config.sim.trials, lin, lin, config.sim.seed,
            field_mode=config.sim.field_mode,
            redraw_user_per_slot=config.sim.redraw_user_per_slot,
            threads=threads)
        rows.extend(_report_rows(label, value, report.derived, report, gammas,
                                 "simulation"))
    _write_csv(out_path, SIMULATION_COLUMNS, rows, config.precision)
    _write_meta(config, out_path)
    print(f"simulate: wrote {len(rows)} rows to {out_path}")
    return 0


def cmd_validate(config: ExperimentConfig, out_path: str | None = None,
                 threads: int = 1, lambda_t_scale: float = 1.0) -> int:
    """Cross-validate analysis against extended-field simulation.

    ``lambda_t_scale`` is a test hook that corrupts the analytical
    transmitter density; anything other than 1.0 must make validation fail.
    """
    grid = config.grid()
    params, scheme = config.network, config.scheme
    ana = analyze_point(params, scheme, config.gamma_db, grid, config.rel_tol)
    derived = ana.derived
    if lambda_t_scale != 1.0:
        derived = replace(
            derived,
            active_density_per_m2=derived.active_density_per_m2 * lambda_t_scale)
        ana = analysis.MetricsReport(
            mode="analysis", derived=derived,
            bs_outage=analysis.OutageCurve(
                ana.bs_outage.thresholds,
                np.array([analysis._bs_outage(params,
                                              derived.active_density_per_m2,
                                              g, grid)
                          for g in ana.bs_outage.thresholds])),
            d2d_outage=ana.d2d_outage, sum_rate=ana.sum_rate)

    lin = [10.0 ** (g / 10.0) for g in config.gamma_db]
    sim_settings = config.sim
    emp = simulator.estimate_metrics(
        params, scheme, sim_settings.slots, sim_settings.burn_in,
        sim_settings.trials, lin, lin, sim_settings.seed,
        field_mode="extended", redraw_user_per_slot=True, threads=threads)

    tol = config.tolerances
    checks = [("pi_o", derived.operable_prob, emp.derived.operable_prob,
               emp.pi_o_stderr, tol.pi_o),
              ("p_t", derived.transmit_prob, emp.derived.transmit_prob,
               emp.p_t_stderr, tol.p_t)]
    for i, gdb in enumerate(config.gamma_db):
        checks.append((f"bs_outage@{gdb:g}dB", ana.bs_outage.probabilities[i],
                       emp.bs_outage.probabilities[i],
                       emp.bs_outage_stderr[i], tol.outage))
        checks.append((f"d2d_outage@{gdb:g}dB", ana.d2d_outage.probabilities[i],
                       emp.d2d_outage.probabilities[i],
                       emp.d2d_outage_stderr[i], tol.outage))
    rate_scale = max(abs(ana.sum_rate), 1e-12)
    checks.append(("sum_rate(rel)", 1.0, emp.sum_rate / rate_scale,
                   emp.sum_rate_stderr / rate_scale, tol.sum_rate_rel))

    lines = [f"{'metric':<18} {'analysis':>12} {'simulation':>12} "
             f"{'|diff|':>10} {'ci95':>10} {'tol':>8}  verdict"]
    ok = True
    for name, a, s, se, t in checks:
        diff = abs(a - s)
        passed = diff <= t
        ok &= passed
        lines.append(f"{name:<18} {a:>12.5f} {s:>12.5f} {diff:>10.5f} "
                     f"{1.96 * se:>10.5f} {t:>8.3g}  "
                     f"{'pass' if passed else 'FAIL'}")
    table = "\n".join(lines)
    print(table)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(table + "\n")
        _write_meta(config, out_path)
    print(f"validate: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 4


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="d2deh",
        description="Analyze and simulate an RF-energy-harvesting D2D underlay cell")
    parser.add_argument("command", choices=["analyze", "simulate", "validate"])
    parser.add_argument("--config", required=True, help="TOML experiment config")
    parser.add_argument("--out", default=None, help="output CSV/table path")
    parser.add_argument("--seed", type=int, default=None, help="override sim seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes for simulation trials")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = replace(config, sim=replace(config.sim, seed=args.seed))
        out = args.out or config.csv_path
        if args.command == "analyze":
            return cmd_analyze(config, out)
        if args.command == "simulate":
            return cmd_simulate(config, out, threads=args.threads)
        return cmd_validate(config, out_path=args.out, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, IntegrationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
