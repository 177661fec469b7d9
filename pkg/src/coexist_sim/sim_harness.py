"""Batch experiment harness and CLI.

Each experiment draws independent channel realizations, runs the radar-side
null-space projection and the cellular-side alternating design, evaluates the
detection chain, and emits one row per (trial, sweep value, metric) to CSV or
JSON. Trials whose solver exit is not optimal are flagged, excluded from
means and counted in the reported exclusion rate.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import radar_detection, radar_nsp, robust_beamforming
from .cellular_fd import DistortionParams, interference_to_radar
from .channel_model import ScenarioConfig, apply_radar_projection, draw_channel_set
from .errors import CoexistSimError, SdpInfeasible, SdpSolveError
from .robust_beamforming import AlgorithmConfig

EXPERIMENTS = (
    "convergence",
    "complexity",
    "interference_vs_rsi",
    "interference_vs_qos",
    "pod_vs_power",
    "pod_vs_pfa",
)

DEFAULT_SWEEPS: Dict[str, list] = {
    "convergence": [0],
    "complexity": [1, 2, 3],
    "interference_vs_rsi": [-90.0, -80.0, -70.0, -60.0],
    "interference_vs_qos": [1e5, 2.5e5, 5e5, 7.5e5, 1e6],
    "pod_vs_power": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
    "pod_vs_pfa": [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1],
}

DESK_RADAR_ANTENNAS = 4
DESK_TRIALS = 20
FULL_TRIALS = 100

CSV_COLUMNS = ("experiment", "sweep_value", "trial", "metric", "value", "metadata")


@dataclass
class ExperimentSpec:
    name: str
    sweep: list
    trials: int = FULL_TRIALS
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise CoexistSimError(f"unknown experiment {self.name!r}")
        if not self.sweep:
            raise CoexistSimError("sweep must be non-empty")
        if self.trials < 1:
            raise CoexistSimError("trials must be >= 1")


@dataclass
class ResultRow:
    experiment: str
    sweep_value: object
    trial: int
    metric: str
    value: float
    metadata: Dict[str, object] = field(default_factory=dict)


def trial_seed(seed: int, experiment: str, sweep_value, trial: int) -> int:
    """Deterministic per-trial seed: scenario seed XOR a stable hash."""
    tag = f"{experiment}|{sweep_value!r}|{trial}".encode()
    return (int(seed) ^ zlib.crc32(tag)) & 0xFFFFFFFF


def _sort_key(row: ResultRow):
    return (row.experiment, str(row.sweep_value), row.trial, row.metric)


def _prepare_trial(scenario: ScenarioConfig, seed: int):
    """Channels, effective (projected) channels and projector for one trial."""
    rng = np.random.default_rng(seed)
    chs = draw_channel_set(scenario, rng)
    stack = radar_nsp.stack_interference(chs)
    projector = radar_nsp.build_projector(stack, allow_empty=True)
    chs_eff = apply_radar_projection(chs, projector.p)
    return chs, chs_eff, projector, rng


def _solve_rows(name: str, value, trial: int, scenario: ScenarioConfig,
                seed: int) -> Tuple[List[ResultRow], Optional[dict]]:
    """Run projector + alternating design; return rows (or a failure row)."""
    chs, chs_eff, projector, _ = _prepare_trial(scenario, seed)
    cfg = AlgorithmConfig()
    meta = {"seed": seed, "rank_p": projector.rank}
    t0 = time.perf_counter()
    try:
        res = robust_beamforming.alternating_solve(chs_eff, cfg, scenario)
    except (SdpInfeasible, SdpSolveError, np.linalg.LinAlgError) as exc:
        meta["status"] = type(exc).__name__
        return [ResultRow(name, value, trial, "failed", 1.0, meta)], None
    dt = time.perf_counter() - t0
    meta["status"] = "Optimal"
    meta["iterations"] = res.iterations
    dist = DistortionParams(scenario.psi, scenario.upsilon)
    i_rad = interference_to_radar(chs, res.beamformers, dist)
    min_rate = min(res.rates.values()) * scenario.bandwidth_hz
    rows = [
        ResultRow(name, value, trial, "gamma_opt", res.gamma_opt, meta),
        ResultRow(name, value, trial, "i_rad_watts", i_rad, meta),
        ResultRow(name, value, trial, "min_rate_bps", min_rate, meta),
        ResultRow(name, value, trial, "iterations", float(res.iterations), meta),
        ResultRow(name, value, trial, "converged", float(res.converged), meta),
        ResultRow(name, value, trial, "solve_seconds", dt, meta),
    ]
    ctx = {"chs": chs, "chs_eff": chs_eff, "projector": projector, "result": res}
    return rows, ctx


def _trial_convergence(spec: ExperimentSpec, trial: int) -> List[ResultRow]:
    value = spec.sweep[0]
    seed = trial_seed(spec.scenario.seed, spec.name, value, trial)
    rows, ctx = _solve_rows(spec.name, value, trial, spec.scenario, seed)
    if ctx is not None:
        trace = ctx["result"].gamma_trace
        meta = dict(rows[0].metadata)
        rows.append(ResultRow(spec.name, value, trial, "gamma_initial",
                              trace[0] if trace else math.nan, meta))
        monotone = all(trace[k + 1] <= trace[k] + 1e-6 * max(1.0, abs(trace[k]))
                       for k in range(len(trace) - 1))
        rows.append(ResultRow(spec.name, value, trial, "trace_monotone",
                              float(monotone), meta))
    return rows


def _trial_complexity(spec: ExperimentSpec, trial: int) -> List[ResultRow]:
    rows: List[ResultRow] = []
    for value in spec.sweep:
        v = int(value)
        variants = {
            "users": spec.scenario.replace(num_ul_users=v, num_dl_users=v),
            "antennas": spec.scenario.replace(antennas_bs_tx=v, antennas_bs_rx=v,
                                              antennas_user=v),
        }
        for tag, scen in variants.items():
            seed = trial_seed(scen.seed, spec.name, f"{tag}:{v}", trial)
            chs, chs_eff, projector, _ = _prepare_trial(scen, seed)
            bf = robust_beamforming.right_singular_init(chs_eff, scen)
            dist = DistortionParams(scen.psi, scen.upsilon)
            from .cellular_fd import mmse_receiver

            bf.u = {i: mmse_receiver(chs_eff, bf, dist, scen.p_radar_watts, i)
                    for i in chs_eff.links}
            bf.b = {i: robust_beamforming.update_b_closed_form(
                chs_eff, bf, dist, scen.p_radar_watts, i) for i in chs_eff.links}
            cfg = AlgorithmConfig()
            t0 = time.perf_counter()
            problem, _ = robust_beamforming.assemble_p3_vstep(
                chs_eff, bf, cfg, scen, p_r=scen.p_radar_watts)
            estimate = robust_beamforming.complexity_estimate(problem)
            from . import sdp_engine

            sol = sdp_engine.solve(problem, tol=cfg.sdp_tol, max_iter=100)
            dt = time.perf_counter() - t0
            meta = {"seed": seed, "status": sol.status, "axis": tag}
            rows.append(ResultRow(spec.name, value, trial, f"complexity_{tag}",
                                  estimate, meta))
            rows.append(ResultRow(spec.name, value, trial, f"solve_seconds_{tag}",
                                  dt, meta))
    return rows


def _trial_interference(spec: ExperimentSpec, trial: int) -> List[ResultRow]:
    rows: List[ResultRow] = []
    for value in spec.sweep:
        if spec.name == "interference_vs_rsi":
            lin = 10.0 ** (float(value) / 10.0)
            scen = spec.scenario.replace(psi=lin, upsilon=lin)
        else:
            scen = spec.scenario.replace(qos_ul_bps=float(value), qos_dl_bps=float(value))
        seed = trial_seed(scen.seed, spec.name, value, trial)
        sub, _ = _solve_rows(spec.name, value, trial, scen, seed)
        rows.extend(sub)
    return rows


def _trial_pod(spec: ExperimentSpec, trial: int) -> List[ResultRow]:
    # channels and the cellular design are shared across the sweep: transmit
    # power / false-alarm rate enter only the detection chain
    scenario = spec.scenario
    seed = trial_seed(scenario.seed, spec.name, "all", trial)
    base_rows, ctx = _solve_rows(spec.name, "all", trial, scenario, seed)
    rows: List[ResultRow] = []
    if ctx is None:
        for value in spec.sweep:
            rows.append(ResultRow(spec.name, value, trial, "failed", 1.0,
                                  dict(base_rows[0].metadata)))
        return rows
    chs = ctx["chs"]
    projector = ctx["projector"]
    res = ctx["result"]
    dist = DistortionParams(scenario.psi, scenario.upsilon)
    for value in spec.sweep:
        if spec.name == "pod_vs_power":
            p_r = 10.0 ** (float(value) / 10.0)
            p_fa = scenario.p_fa
        else:
            p_r = scenario.p_radar_watts
            p_fa = float(value)
        params = radar_detection.RadarParams.from_scenario(scenario, p_r=p_r, p_fa=p_fa)
        a_mat = radar_detection.steering_matrix(params)
        chi_share = radar_detection.radar_interference_covariance(
            chs, res.beamformers, scenario.psi, params.sigma_r2)
        rho_s = radar_detection.noncentrality_rho(params, a_mat, projector, chi_share)
        pod_s = radar_detection.prob_detection(rho_s, p_fa)
        ident = radar_detection.identity_projector(params.r_antennas)
        chi_ns = radar_detection.silent_covariance(params.r_antennas, params.sigma_r2)
        rho_ns = radar_detection.noncentrality_rho(params, a_mat, ident, chi_ns)
        pod_ns = radar_detection.prob_detection(rho_ns, p_fa)
        meta = {"seed": seed, "status": "Optimal", "rank_p": projector.rank,
                "rho": rho_s, "threshold": radar_detection.detection_threshold(p_fa)}
        rows.append(ResultRow(spec.name, value, trial, "pod_sharing", pod_s, meta))
        rows.append(ResultRow(spec.name, value, trial, "pod_nosharing", pod_ns, meta))
        rows.append(ResultRow(spec.name, value, trial, "rho_sharing", rho_s, meta))
        rows.append(ResultRow(spec.name, value, trial, "rho_nosharing", rho_ns, meta))
    return rows


_TRIAL_FUNCS = {
    "convergence": _trial_convergence,
    "complexity": _trial_complexity,
    "interference_vs_rsi": _trial_interference,
    "interference_vs_qos": _trial_interference,
    "pod_vs_power": _trial_pod,
    "pod_vs_pfa": _trial_pod,
}


def _run_trial(args) -> List[ResultRow]:
    spec_dict, trial = args
    spec = ExperimentSpec(name=spec_dict["name"], sweep=spec_dict["sweep"],
                          trials=spec_dict["trials"],
                          scenario=ScenarioConfig(**spec_dict["scenario"]))
    return _TRIAL_FUNCS[spec.name](spec, trial)


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> List[ResultRow]:
    """Run all trials; per-trial failures are recorded, never raised."""
    spec.scenario.validate()
    spec_dict = {"name": spec.name, "sweep": list(spec.sweep), "trials": spec.trials,
                 "scenario": dataclasses.asdict(spec.scenario)}
    tasks = [(spec_dict, t) for t in range(spec.trials)]
    rows: List[ResultRow] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_run_trial, tasks):
                rows.extend(part)
    else:
        for task in tasks:
            rows.extend(_run_trial(task))
    rows.sort(key=_sort_key)
    return rows


def failed_fraction(rows: Iterable[ResultRow]) -> float:
    """Fraction of (sweep, trial) cells flagged as failed."""
    cells = set()
    failed = set()
    for r in rows:
        key = (str(r.sweep_value), r.trial)
        cells.add(key)
        if r.metric == "failed":
            failed.add(key)
    return len(failed) / len(cells) if cells else 0.0


def summarize(rows: Iterable[ResultRow], metric: str) -> Dict[object, float]:
    """Mean of a metric per sweep value over non-failed trials."""
    rows = list(rows)
    failed = {(str(r.sweep_value), r.trial) for r in rows if r.metric == "failed"}
    acc: Dict[object, List[float]] = {}
    for r in rows:
        if r.metric != metric or (str(r.sweep_value), r.trial) in failed:
            continue
        acc.setdefault(r.sweep_value, []).append(r.value)
    return {k: float(np.mean(v)) for k, v in acc.items()}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def emit(rows: Sequence[ResultRow], fmt: str, path) -> None:
    """Write rows with a stable column order and 12-significant-digit floats."""
    if fmt not in ("csv", "json"):
        raise CoexistSimError(f"unknown output format {fmt!r}")
    try:
        if fmt == "csv":
            import csv

            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(CSV_COLUMNS)
                for r in rows:
                    writer.writerow([r.experiment, _fmt(r.sweep_value), r.trial,
                                     r.metric, _fmt(r.value),
                                     json.dumps(r.metadata, sort_keys=True, default=str)])
        else:
            payload = [{
                "experiment": r.experiment,
                "sweep_value": _fmt(r.sweep_value),
                "trial": r.trial,
                "metric": r.metric,
                "value": _fmt(r.value),
                "metadata": {k: str(v) for k, v in sorted(r.metadata.items())},
            } for r in rows]
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=1)
                fh.write("\n")
    except OSError as exc:
        raise CoexistSimError(f"cannot write {path}: {exc}") from exc


def read_rows(path, fmt: str) -> List[dict]:
    """Read back an emitted file (values stay as the emitted strings)."""
    if fmt == "csv":
        import csv

        with open(path, "r", encoding="utf-8", newline="") as fh:
            return list(csv.DictReader(fh))
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    for d in data:
        d["metadata"] = json.dumps(d["metadata"], sort_keys=True)
        d["trial"] = str(d["trial"])
    return data


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def _load_scenario(path: Optional[str]) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    return ScenarioConfig.from_file(path)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="coexist-sim",
                                     description="radar/cellular spectrum sharing simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run one experiment and write result rows")
    runp.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    runp.add_argument("--config", default=None, help="scenario key=value file")
    runp.add_argument("--out", required=True)
    runp.add_argument("--format", default="csv", choices=("csv", "json"))
    runp.add_argument("--trials", type=int, default=None)
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--full-scale", action="store_true",
                      help="paper scale: R=8 radar antennas, 100 trials")
    runp.add_argument("--workers", type=int, default=1)

    valp = sub.add_parser("validate", help="check a scenario file and print it resolved")
    valp.add_argument("--config", required=True)

    args = parser.parse_args(argv)

    if args.command == "validate":
        try:
            cfg = _load_scenario(args.config)
        except (CoexistSimError, OSError, ValueError) as exc:
            print(f"invalid configuration: {exc}", file=sys.stderr)
            return 1
        for key, value in sorted(dataclasses.asdict(cfg).items()):
            print(f"{key} = {value}")
        return 0

    scenario = _load_scenario(args.config)
    if args.seed is not None:
        scenario = scenario.replace(seed=args.seed)
    if args.full_scale:
        trials = args.trials if args.trials is not None else FULL_TRIALS
    else:
        scenario = scenario.replace(radar_antennas=min(scenario.radar_antennas,
                                                       DESK_RADAR_ANTENNAS))
        trials = args.trials if args.trials is not None else DESK_TRIALS
    spec = ExperimentSpec(name=args.experiment,
                          sweep=list(DEFAULT_SWEEPS[args.experiment]),
                          trials=trials, scenario=scenario)
    rows = run_experiment(spec, workers=max(1, args.workers))
    emit(rows, args.format, args.out)
    frac = failed_fraction(rows)
    print(f"wrote {len(rows)} rows to {args.out} (failed trials: {frac:.1%})")
    return 2 if frac > 0.2 else 0


if __name__ == "__main__":
    sys.exit(main())
