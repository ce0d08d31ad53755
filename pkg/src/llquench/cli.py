"""Command-line experiment runner.

    llquench --scenario quench --out runs/q6
    llquench --config recipe.json --gamma -30 --chi 64

Scenarios: ``spectrum`` (two-particle spectrum against 1/gamma), ``quench``
(TEBD quench of a trapped TG gas), ``two-particle`` (exact two-body quench and
its beating approximations) and ``validate`` (oracle and asymptotics checks,
JSON report). Times in all outputs are in units of ``4 / rho**2``.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 runtime abort.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import math
import sys
import time as _time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bethe2, ed, model, mps, observables, tebd

log = logging.getLogger("llquench")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

SCENARIOS = ("spectrum", "quench", "two-particle", "validate")

DEFAULTS = {
    "scenario": "quench",
    "physics": {
        "n_particles": 6,
        "gamma": -18.7931,
        "rho": 1.0,
        "omega": None,
        "box_length": None,
        "margin": 0.25,
    },
    "lattice": {"n_sites": 256, "n_max": 4},
    "evolution": {"dt": None, "t_final": None, "measure_every": 1, "order": 4, "snapshots": 5},
    "preparation": {"dt": None, "tol": 1e-7, "stages": 3, "coarse_levels": 2, "max_steps": 20000},
    "truncation": {"chi_max": 100, "svd_cutoff": 1e-10, "abort_weight": 1e-3},
    "spectrum": {"inv_gamma_min": -1.0, "inv_gamma_max": 1.0, "n_points": 201, "n_branches": 4},
    "two_particle": {"n_branches": 1000, "n_times": 4000, "periods": 10.0, "companion_n_particles": None},
    "seed": 0,
    "output_dir": "llq-out",
}

SCENARIO_DEFAULTS = {
    "two-particle": {"physics": {"gamma": -89.0355}},
}

PAPER_SCALE = {
    "physics": {"n_particles": 18},
    "lattice": {"n_sites": 1280},
    "truncation": {"chi_max": 100},
}


class ConfigError(ValueError):
    pass


# --- configuration -------------------------------------------------------------


def _merge(base: dict, over: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        path = f"{where}{key}"
        if key not in base:
            raise ConfigError(f"{path}: unknown field")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{path}: expected an object")
            out[key] = _merge(base[key], val, path + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def _check(cond: bool, field_name: str, msg: str) -> None:
    if not cond:
        raise ConfigError(f"{field_name}: {msg}")


def _number(cfg: dict, section: str, key: str, *, integer: bool = False, allow_none: bool = False):
    val = cfg[section][key]
    name = f"{section}.{key}"
    if val is None:
        _check(allow_none, name, "required")
        return None
    _check(isinstance(val, (int, float)) and not isinstance(val, bool), name, f"expected a number, got {val!r}")
    if integer:
        _check(float(val).is_integer(), name, f"expected an integer, got {val!r}")
        return int(val)
    _check(math.isfinite(val), name, "must be finite")
    return float(val)


def validate_config(cfg: dict) -> dict:
    """Check every field the chosen scenario depends on; raises ``ConfigError``."""
    _check(cfg["scenario"] in SCENARIOS, "scenario", f"must be one of {', '.join(SCENARIOS)}")
    n = _number(cfg, "physics", "n_particles", integer=True)
    _check(n >= 1, "physics.n_particles", "must be >= 1")
    _check(_number(cfg, "physics", "rho") > 0, "physics.rho", "must be positive")
    gamma = _number(cfg, "physics", "gamma")
    omega = _number(cfg, "physics", "omega", allow_none=True)
    box = _number(cfg, "physics", "box_length", allow_none=True)
    _check(omega is None or omega >= 0, "physics.omega", "must be >= 0")
    _check(box is None or box > 0, "physics.box_length", "must be positive")
    _check((omega is None) == (box is None), "physics.box_length", "omega and box_length must be given together")
    _check(_number(cfg, "physics", "margin") >= 0, "physics.margin", "must be >= 0")
    _check(isinstance(cfg["seed"], int), "seed", "expected an integer")
    _check(isinstance(cfg["output_dir"], str) and cfg["output_dir"], "output_dir", "expected a path")

    chi = _number(cfg, "truncation", "chi_max", integer=True)
    _check(chi >= 1, "truncation.chi_max", "must be >= 1")
    cut = _number(cfg, "truncation", "svd_cutoff")
    _check(0 <= cut < 1, "truncation.svd_cutoff", "must lie in [0, 1)")
    abort = _number(cfg, "truncation", "abort_weight", allow_none=True)
    _check(abort is None or abort > 0, "truncation.abort_weight", "must be positive")

    ev = cfg["evolution"]
    dt = _number(cfg, "evolution", "dt", allow_none=True)
    _check(dt is None or dt > 0, "evolution.dt", "must be positive")
    tf = _number(cfg, "evolution", "t_final", allow_none=True)
    _check(tf is None or tf > 0, "evolution.t_final", "must be positive")
    _check(_number(cfg, "evolution", "measure_every", integer=True) >= 1, "evolution.measure_every", "must be >= 1")
    _check(ev["order"] in (2, 4), "evolution.order", "must be 2 or 4")
    snaps = ev["snapshots"]
    _check(
        (isinstance(snaps, int) and snaps >= 0) or (isinstance(snaps, list) and all(isinstance(t, (int, float)) and t >= 0 for t in snaps)),
        "evolution.snapshots",
        "expected a count or a list of non-negative times",
    )

    scen = cfg["scenario"]
    if scen in ("quench", "two-particle") and (scen == "quench" or cfg["two_particle"]["companion_n_particles"]):
        m = _number(cfg, "lattice", "n_sites", integer=True)
        nmax = _number(cfg, "lattice", "n_max", integer=True)
        n_q = n if scen == "quench" else int(cfg["two_particle"]["companion_n_particles"])
        _check(m >= 2 * n_q, "lattice.n_sites", f"must be >= 2*n_particles = {2 * n_q}")
        _check(n_q / m < model.MAX_FILLING, "lattice.n_sites", f"filling {n_q / m:.3f} must stay below {model.MAX_FILLING}")
        _check(nmax >= 2, "lattice.n_max", "must be >= 2")
        pdt = _number(cfg, "preparation", "dt", allow_none=True)
        _check(pdt is None or pdt > 0, "preparation.dt", "must be positive")
        _check(_number(cfg, "preparation", "tol") > 0, "preparation.tol", "must be positive")
        _check(_number(cfg, "preparation", "stages", integer=True) >= 1, "preparation.stages", "must be >= 1")
        _check(_number(cfg, "preparation", "coarse_levels", integer=True) >= 0, "preparation.coarse_levels", "must be >= 0")
        _check(_number(cfg, "preparation", "max_steps", integer=True) >= 1, "preparation.max_steps", "must be >= 1")
    if scen == "two-particle":
        _check(gamma < 0, "physics.gamma", "two-particle quench needs attraction (gamma < 0)")
        _check(_number(cfg, "two_particle", "n_branches", integer=True) >= 1, "two_particle.n_branches", "must be >= 1")
        _check(_number(cfg, "two_particle", "n_times", integer=True) >= 2, "two_particle.n_times", "must be >= 2")
        _check(_number(cfg, "two_particle", "periods") > 0, "two_particle.periods", "must be positive")
        comp = cfg["two_particle"]["companion_n_particles"]
        _check(comp is None or (isinstance(comp, int) and comp >= 2), "two_particle.companion_n_particles", "must be null or >= 2")
    if scen == "spectrum":
        sp = cfg["spectrum"]
        lo, hi = _number(cfg, "spectrum", "inv_gamma_min"), _number(cfg, "spectrum", "inv_gamma_max")
        _check(lo < hi, "spectrum.inv_gamma_max", "must exceed inv_gamma_min")
        _check(_number(cfg, "spectrum", "n_points", integer=True) >= 2, "spectrum.n_points", "must be >= 2")
        _check(_number(cfg, "spectrum", "n_branches", integer=True) >= 1, "spectrum.n_branches", "must be >= 1")
        del sp
    return cfg


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then scenario defaults, paper scale, the JSON file, then flags."""
    file_cfg: dict = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"--config: cannot read {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--config: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("--config: top level must be an object")
    scenario = args.scenario or file_cfg.get("scenario") or DEFAULTS["scenario"]
    cfg = _merge(DEFAULTS, SCENARIO_DEFAULTS.get(scenario, {}))
    if args.paper_scale:
        cfg = _merge(cfg, PAPER_SCALE)
    cfg = _merge(cfg, file_cfg)
    cfg["scenario"] = scenario
    flags = {
        ("physics", "gamma"): args.gamma,
        ("physics", "n_particles"): args.n_particles,
        ("lattice", "n_sites"): args.sites,
        ("truncation", "chi_max"): args.chi,
        ("evolution", "dt"): args.dt,
        ("evolution", "t_final"): args.t_final,
    }
    for (sec, key), val in flags.items():
        if val is not None:
            cfg[sec][key] = val
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out is not None:
        cfg["output_dir"] = args.out
    return validate_config(cfg)


# --- shared helpers ------------------------------------------------------------


def continuum_params(cfg: dict) -> model.ContinuumParams:
    ph = cfg["physics"]
    if ph["omega"] is None:
        return model.trapped_gas(int(ph["n_particles"]), float(ph["gamma"]), float(ph["rho"]), float(ph["margin"]))
    return model.ContinuumParams(
        n_particles=int(ph["n_particles"]),
        g=float(ph["gamma"]) * float(ph["rho"]),
        rho=float(ph["rho"]),
        omega=float(ph["omega"]),
        box_length=float(ph["box_length"]),
    )


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if not math.isfinite(v) else f"{v:.12g}"


def write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def _echo_config(cfg: dict, out: Path) -> None:
    (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")


def lattice_binding_energy(lp: model.LatticeParams) -> float:
    """Two-body binding energy of the infinite Bose-Hubbard chain at zero pair momentum."""
    u, j = lp.onsite_u, lp.hopping
    if u >= 0:
        return 0.0
    return math.sqrt(u * u + 16.0 * j * j) - 4.0 * j


# --- spectrum ------------------------------------------------------------------


def run_spectrum(cfg: dict) -> dict:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    sp = cfg["spectrum"]
    inv = np.linspace(sp["inv_gamma_min"], sp["inv_gamma_max"], int(sp["n_points"]))
    gammas = [math.inf if x == 0 else 1.0 / x for x in inv]
    points = bethe2.spectrum(gammas, int(sp["n_branches"]))
    rows = []
    for x, p in zip(inv, points):
        if math.isfinite(p.bound_energy):
            rows.append((x, -1, p.bound_energy))
        for k, e in enumerate(p.energies):
            rows.append((x, k, e))
    files = [write_csv(out / "spectrum.csv", ["inv_gamma", "branch", "energy"], rows)]
    energies = np.array([p.energies for p in points])
    bound = np.array([p.bound_energy for p in points])
    from . import plots

    files.append(plots.spectrum_figure(inv, energies, bound, out / "spectrum.svg"))
    _echo_config(cfg, out)
    return {"files": [str(f) for f in files]}


# --- quench --------------------------------------------------------------------


@dataclass
class QuenchResult:
    trajectory: tebd.Trajectory
    rows: list = field(default_factory=list)
    reference: observables.CorrelationRow | None = None
    lattice: model.LatticeParams | None = None
    continuum: model.ContinuumParams | None = None
    anchor: int = 0
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def default_real_dt(lp: model.LatticeParams) -> float:
    return 1.0 / lp.hopping


def prepare_tg_state(cp: model.ContinuumParams, lp: model.LatticeParams, cfg: dict) -> mps.SymmetricMPS:
    hc = model.hardcore(lp)
    pr = cfg["preparation"]
    tr = cfg["truncation"]
    policy = mps.TruncationPolicy(chi_max=int(tr["chi_max"]), svd_cutoff=float(tr["svd_cutoff"]))
    dt = pr["dt"] * cp.units.time_unit if pr["dt"] is not None else 1.0 / hc.hopping
    prep = tebd.EvolutionConfig(dt=dt, n_steps=1, policy=policy, measure_every=10, order=2, imaginary=True)
    return tebd.prepare_ground_state(
        hc,
        cp.n_particles,
        prep,
        stages=int(pr["stages"]),
        tol=float(pr["tol"]),
        max_steps=int(pr["max_steps"]),
        coarse_levels=int(pr["coarse_levels"]),
        n_max_out=lp.n_max,
    )


def _snapshot_steps(cfg: dict, n_steps: int, dt_units: float, stride: int) -> set[int]:
    snaps = cfg["evolution"]["snapshots"]
    if isinstance(snaps, list):
        targets = [t / dt_units for t in snaps]
    else:
        targets = list(np.linspace(0, n_steps, snaps)) if snaps > 1 else ([0] if snaps == 1 else [])
    steps = set()
    for t in targets:
        s = min(int(round(t / stride)) * stride, n_steps)
        steps.add(max(s, 0))
    return steps


def run_quench(cfg: dict, write: bool = True, initial_state: mps.SymmetricMPS | None = None) -> QuenchResult:
    """Prepare the trapped TG state, quench to ``physics.gamma`` and record observables.

    ``initial_state`` skips the preparation; it is copied, not modified.
    """
    cp = continuum_params(cfg)
    lp = model.discretize(cp, int(cfg["lattice"]["n_sites"]), int(cfg["lattice"]["n_max"]))
    units = cp.units
    gamma = cp.gamma
    ev, tr = cfg["evolution"], cfg["truncation"]
    dt_units = ev["dt"] if ev["dt"] is not None else default_real_dt(lp) / units.time_unit
    if ev["t_final"] is not None:
        t_final = float(ev["t_final"])
    else:
        t_final = 6.0 * 2.0 * math.pi / gamma**2 if gamma != 0 else 0.1
    n_steps = max(1, int(math.ceil(t_final / dt_units - 1e-9)))
    stride = int(ev["measure_every"])

    b_lat = lattice_binding_energy(lp) * units.time_unit
    if gamma < 0:
        b_cont = gamma**2
        log.info(
            "beat frequency: continuum %.6g, lattice two-body %.6g (ratio %.4f) [units rho^2/4]",
            b_cont,
            b_lat,
            b_lat / b_cont,
        )
    if initial_state is None:
        t0 = _time.time()
        state = prepare_tg_state(cp, lp, cfg)
        log.info("TG state prepared in %.1f s, max bond dimension %d", _time.time() - t0, max(state.bond_dims))
    else:
        if initial_state.n_sites != lp.n_sites or initial_state.total_charge != cp.n_particles:
            raise ValueError("initial state does not match the configured lattice")
        state = mps.embed(initial_state, lp.n_max) if initial_state.n_max < lp.n_max else initial_state.copy()

    _, dens0, _ = observables.measure(state, lp)
    anchor = observables.center_site(dens0)
    snap_steps = _snapshot_steps(cfg, n_steps, dt_units, stride)
    rows: list = []
    dt = dt_units * units.time_unit

    def observer(st, t):
        row, _, vals = observables.measure(st, lp, anchor, time=t / units.time_unit)
        if int(round(t / dt)) in snap_steps:
            rows.append(row)
        return vals

    config = tebd.EvolutionConfig(
        dt=dt,
        n_steps=n_steps,
        policy=mps.TruncationPolicy(chi_max=int(tr["chi_max"]), svd_cutoff=float(tr["svd_cutoff"])),
        measure_every=stride,
        order=int(ev["order"]),
        abort_weight=tr["abort_weight"],
    )
    t0 = _time.time()
    traj = tebd.evolve_real(state, lp, config, observer, time_unit=units.time_unit)
    log.info("real-time evolution: %d steps in %.1f s", n_steps, _time.time() - t0)

    reference = None
    if gamma < 0 and rows:
        a_1d = model.scattering_length(cp.g)
        if a_1d * cp.rho < 1:
            reference = bethe2.hs_reference(rows[0], a_1d, cp.rho).resample(lp.positions)
    result = QuenchResult(trajectory=traj, rows=rows, reference=reference, lattice=lp, continuum=cp, anchor=anchor)
    result.summary = {
        "gamma": gamma,
        "n_steps": n_steps,
        "dt": dt_units,
        "t_final": n_steps * dt_units,
        "anchor_x": float(lp.positions[anchor]),
        "beat_frequency_continuum": gamma**2 if gamma < 0 else None,
        "beat_frequency_lattice": b_lat if gamma < 0 else None,
        "max_truncation_weight": float(max(traj.truncation_weight)),
    }
    if write:
        result.files = _write_quench(cfg, result)
    return result


def _write_quench(cfg: dict, res: QuenchResult) -> list:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    traj = res.trajectory
    cols = [traj.column(k) for k in ("g2_local", "g3_local", "sum_rule")]
    rows = zip(traj.times, cols[0], cols[1], cols[2], traj.max_entropy, traj.truncation_weight)
    files = [
        write_csv(
            out / "trajectory.csv",
            ["time", "g2_local", "g3_local", "sum_rule", "max_entropy", "truncation_weight"],
            rows,
        )
    ]
    t_late = 0.5 * res.summary["t_final"]
    for row in res.rows:
        ref = res.reference if (res.reference is not None and row.time >= t_late) else None
        hs = ref.masked() if ref is not None else np.full(row.xs.shape, np.nan)
        files.append(
            write_csv(
                out / f"g2row_t{row.time:.6f}.csv",
                ["x", "separation", "g2", "hs"],
                zip(row.xs, row.separations, row.masked(), hs),
            )
        )
    from . import plots

    files.append(plots.local_figure(np.asarray(traj.times), cols[0], cols[1], out / "g2_local.svg"))
    if res.rows:
        files.append(plots.rows_figure(res.rows, out / "g2_rows.svg", res.continuum.rho, res.reference))
    (out / "summary.json").write_text(json.dumps(res.summary, indent=2, sort_keys=True) + "\n")
    _echo_config(cfg, out)
    return [str(f) for f in files]


# --- two particles ---------------------------------------------------------------


def run_two_particle(cfg: dict) -> dict:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    gamma = float(cfg["physics"]["gamma"])
    tp = cfg["two_particle"]
    t_final = cfg["evolution"]["t_final"] or float(tp["periods"]) * 2.0 * math.pi / gamma**2
    times = np.linspace(0.0, t_final, int(tp["n_times"]))
    exact = bethe2.g2_exact_quench(gamma, times, int(tp["n_branches"]))
    single = bethe2.g2_single_mode(gamma, times)
    beating = bethe2.g2_two_state(gamma, times)
    files = [
        write_csv(
            out / "two_particle.csv",
            ["time", "g2_exact", "g2_bound_interference", "g2_beating"],
            zip(times, exact, single, beating),
        )
    ]
    companion = None
    if tp["companion_n_particles"]:
        sub = copy.deepcopy(cfg)
        sub["physics"]["n_particles"] = int(tp["companion_n_particles"])
        sub["evolution"]["t_final"] = t_final
        sub["evolution"]["snapshots"] = 0
        res = run_quench(sub, write=False)
        companion = (np.asarray(res.trajectory.times), res.trajectory.column("g2_local"))
        files.append(write_csv(out / "two_particle_tebd.csv", ["time", "g2_local"], zip(*companion)))
    from . import plots

    files.append(plots.two_particle_figure(times, exact, single, beating, out / "two_particle.svg", companion))
    _echo_config(cfg, out)
    return {"files": [str(f) for f in files]}


# --- validation --------------------------------------------------------------------


def _check_entry(name: str, value: float, tolerance: float, passed: bool, **extra) -> dict:
    return {"name": name, "value": float(value), "tolerance": float(tolerance), "passed": bool(passed), **extra}


def asymptotics_checks() -> list[dict]:
    out = []
    for g in (-20.0, -50.0, -100.0):
        dt = bethe2.solve_bound_root(g).delta_tilde
        rel = abs(dt / (-2.0 * g) - 1.0)
        out.append(_check_entry(f"bound_root_gamma{g:g}", rel, 0.01, rel < 0.01))
    st = bethe2.two_particle_state(bethe2.solve_bound_root(-100.0))
    rel = abs(bethe2.g2_of_state(st.contact_amp) / 50.0 - 1.0)
    out.append(_check_entry("bound_contact_gamma-100", rel, 0.02, rel < 0.02))
    d0 = bethe2.gas_deltas(-100.0, 1)[0]
    rel = abs(d0 / (2.0 * math.pi * (1.0 + 2.0 / 100.0)) - 1.0)
    out.append(_check_entry("gas_branch0_gamma-100", rel, 1e-3, rel < 1e-3))
    eps = abs(bethe2.overlap_tg_bound(-200.0)) * 200.0**1.5
    rel = abs(eps / (2.0 * math.sqrt(2.0) * math.pi) - 1.0)
    out.append(_check_entry("tg_bound_overlap_scaling", rel, 0.05, rel < 0.05))
    e_plus = bethe2.gas_deltas(1e4, 1)[0] ** 2 / 4
    e_minus = bethe2.gas_deltas(-1e4, 1)[0] ** 2 / 4
    diff = abs(e_plus - e_minus) / math.pi**2
    out.append(_check_entry("branch0_continuity", diff, 1e-3, diff < 1e-3))
    ratio = bethe2.solve_bound_root(-1e4).energy / -(1e4**2)
    out.append(_check_entry("bound_energy_ratio", abs(ratio - 1.0), 0.01, abs(ratio - 1.0) <= 0.01))
    g = 1e-4
    e0 = bethe2.gas_deltas(g, 1)[0] ** 2 / 4
    out.append(_check_entry("weak_coupling_ground_energy_linear", abs(e0 - 2 * g), 1e-6, abs(e0 - 2 * g) < 1e-6))
    return out


def beating_checks() -> list[dict]:
    gamma = -89.0355
    period = 2.0 * math.pi / gamma**2
    t = np.linspace(0.0, 40.0 * period, 8192, endpoint=False)
    g2 = bethe2.g2_exact_quench(gamma, t)
    spec = np.abs(np.fft.rfft(g2 - g2.mean()))
    freqs = 2.0 * math.pi * np.fft.rfftfreq(t.size, t[1] - t[0])
    k = int(np.argmax(spec))
    # parabolic refinement of the peak
    a, b, c = spec[k - 1], spec[k], spec[k + 1]
    w = freqs[k] + 0.5 * (a - c) / (a - 2 * b + c) * (freqs[1] - freqs[0])
    target = gamma**2 + math.pi**2
    rel = abs(w / target - 1.0)
    out = [_check_entry("beat_peak", rel, 0.01, rel < 0.01)]
    late = t > 1.0 / gamma**2
    e7 = np.max(np.abs(bethe2.g2_single_mode(gamma, t[late]) - g2[late]))
    e8 = np.max(np.abs(bethe2.g2_two_state(gamma, t[late]) - g2[late]))
    out.append(_check_entry("beating_beats_single_mode", e8 / e7, 1.0, e8 < e7))
    g0 = float(bethe2.g2_exact_quench(gamma, [0.0])[0])
    out.append(_check_entry("g2_initial_zero", g0, 0.0, g0 == 0.0))
    return out


def small_quench_instance(gamma: float = -20.0, n_sites: int = 32, n_particles: int = 2, n_max: int = 2):
    """Box of length ``N / rho`` (rho = 1) without trap, discretized on ``n_sites`` sites."""
    cp = model.ContinuumParams(n_particles=n_particles, g=gamma, rho=1.0, omega=0.0, box_length=float(n_particles))
    return cp, model.discretize(cp, n_sites, n_max)


def trotter_order_slope(dt0: float | None = None, order: int = 4, t_total: float = 1.0) -> tuple[float, list, list]:
    """Global error at ``t_total`` against ED for ``dt0, dt0/2, dt0/4, dt0/8`` on 6 sites, 2 bosons."""
    lp = model.LatticeParams(
        n_sites=6, dx=1.0, hopping=1.0, onsite_u=-2.0, potential=0.1 * (np.arange(6) - 2.5) ** 2, n_max=2, n_particles=2
    )
    basis = ed.FockBasis(6, 2, 2)
    h = ed.build_hamiltonian(lp, basis)
    psi0 = ed.DenseState.fock(basis, [0, 1, 0, 0, 1, 0]).amplitudes
    exact, _ = ed.evolve(h, psi0, t_total)
    dt0 = dt0 if dt0 is not None else t_total / 4
    dts, errs = [], []
    for k in range(4):
        dt = dt0 / 2**k
        n = max(1, int(round(t_total / dt)))
        st = mps.from_amplitudes(basis.states, psi0, 2)
        cfg = tebd.EvolutionConfig(dt=t_total / n, n_steps=n, policy=mps.TruncationPolicy(chi_max=1000, svd_cutoff=0.0), measure_every=n, order=order)
        tebd.evolve(st, lp, cfg)
        dts.append(t_total / n)
        errs.append(float(np.linalg.norm(mps.to_amplitudes(st, basis.states) - exact)))
    slope = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    return slope, dts, errs


def tebd_vs_ed(chi_max: int, gamma: float = -20.0, n_sites: int = 32, n_particles: int = 2, steps_per_unit: float = 20.0) -> dict:
    """Quench the hard-core box ground state to ``gamma`` with TEBD and with ED.

    Runs for one lattice beat period with ``dt = 1 / (steps_per_unit * J)``
    and returns the largest deviations of ``g2_local`` at the central site,
    the norm, the particle number and the energy, plus the summed truncation
    weight.
    """
    cp, lp = small_quench_instance(gamma, n_sites, n_particles, n_max=n_particles)
    basis = ed.FockBasis(lp.n_sites, n_particles, lp.n_max)
    hc_basis = ed.FockBasis(lp.n_sites, n_particles, 1)
    _, gs = ed.ground_state(ed.build_hamiltonian(model.hardcore(lp), hc_basis))
    st = mps.embed(mps.from_amplitudes(hc_basis.states, gs, 1), lp.n_max)
    h = ed.build_hamiltonian(lp, basis)
    psi = mps.to_amplitudes(st, basis.states)
    evolver = ed.Evolver(h)
    e0 = float(np.real(np.vdot(psi, h @ psi)))
    dt = 1.0 / (steps_per_unit * lp.hopping)
    period = 2.0 * math.pi / lattice_binding_energy(lp)
    n = int(math.ceil(period / dt))
    site = lp.n_sites // 2
    config = tebd.EvolutionConfig(dt=dt, n_steps=n, policy=mps.TruncationPolicy(chi_max=chi_max, svd_cutoff=0.0))
    dev = {"g2_local": 0.0, "norm": 0.0, "particle_number": 0.0, "energy": 0.0}

    def observer(s, t):
        amp = mps.to_amplitudes(s, basis.states)
        ref = ed.DenseState(basis, evolver(psi, t))
        g2 = observables.g2_local(s, lp, site)
        dev["g2_local"] = max(dev["g2_local"], abs(g2 - ed.expectation(ref, ("g2_local", site))))
        dev["norm"] = max(dev["norm"], abs(float(np.linalg.norm(amp)) - 1.0))
        n_tot = float(observables.occupations(s).sum())
        dev["particle_number"] = max(dev["particle_number"], abs(n_tot - n_particles))
        e = tebd.energy(s, lp)
        dev["energy"] = max(dev["energy"], abs(e - e0) / abs(e0))
        return {"g2_local": g2}

    traj = tebd.evolve(st, lp, config, observer)
    dev["truncation_weight"] = float(np.sum(traj.truncation_weight))
    dev["basis_dim"] = basis.dim
    dev["n_steps"] = n
    return dev


def oracle_checks(cfg: dict) -> list[dict]:
    out = []
    dt0 = cfg["evolution"]["dt"]
    slope, dts, errs = trotter_order_slope(dt0)
    out.append(_check_entry("trotter_order_slope", slope, 0.3, abs(slope - 4.0) <= 0.3, target=4.0, dts=dts, errors=errs))
    chi = int(cfg["truncation"]["chi_max"])
    dev = tebd_vs_ed(chi)
    out.append(_check_entry("tebd_vs_ed_g2_local", dev["g2_local"], 1e-3, dev["g2_local"] < 1e-3, chi_max=chi))
    out.append(_check_entry("norm_conservation", dev["norm"], 1e-10, dev["norm"] < 1e-10))
    out.append(_check_entry("particle_number", dev["particle_number"], 1e-10, dev["particle_number"] < 1e-10))
    out.append(_check_entry("energy_drift", dev["energy"], 1e-4, dev["energy"] < 1e-4))
    w = dev["truncation_weight"]
    out.append(_check_entry("truncation_weight", w, 1e-8, w < 1e-8, chi_max=chi))
    return out


def run_validate(cfg: dict) -> dict:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    checks = asymptotics_checks() + beating_checks() + oracle_checks(cfg)
    report = {"passed": all(c["passed"] for c in checks), "checks": checks}
    (out / "validation.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _echo_config(cfg, out)
    for c in checks:
        log.info("%s %s value=%.3e tol=%.1e", "PASS" if c["passed"] else "FAIL", c["name"], c["value"], c["tolerance"])
    return report


# --- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="llquench", description="Quench dynamics of a 1D Bose gas (TG -> attractive).")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--out", help="output directory")
    p.add_argument("--gamma", type=float, help="post-quench Tonks parameter")
    p.add_argument("--n-particles", type=int, dest="n_particles")
    p.add_argument("--sites", type=int, help="lattice sites")
    p.add_argument("--chi", type=int, help="maximal bond dimension")
    p.add_argument("--dt", type=float, help="time step [4/rho^2]")
    p.add_argument("--t-final", type=float, dest="t_final", help="final time [4/rho^2]")
    p.add_argument("--seed", type=int)
    p.add_argument("--paper-scale", action="store_true", help="N=18, M=1280, chi=100 (long-running)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    np.random.seed(cfg["seed"])
    scenario = cfg["scenario"]
    try:
        if scenario == "spectrum":
            run_spectrum(cfg)
        elif scenario == "quench":
            run_quench(cfg)
        elif scenario == "two-particle":
            run_two_particle(cfg)
        else:
            report = run_validate(cfg)
            if not report["passed"]:
                failed = [c["name"] for c in report["checks"] if not c["passed"]]
                print(f"validation failed: {', '.join(failed)}", file=sys.stderr)
                return EXIT_VALIDATION
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (tebd.TruncationAbort, tebd.ConvergenceError, bethe2.CompletenessError, ed.BudgetExceeded) as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (RuntimeError, ValueError, MemoryError, OSError) as exc:
        print(f"aborted: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()
