"""Command-line front end.

Every subcommand prints one report.  ``--format json`` (default) gives an
object with ``scenario``, ``seed``, ``analytic``, ``estimate``, ``ci95``,
``runtime_ms`` and a ``details`` block.  ``--format csv`` prints the
subcommand's table with a header row instead.  ``--out DIR`` additionally
writes ``report.json`` and ``<scenario>.csv`` there.

Exit codes: 0 success, 2 invalid configuration, 3 scenario validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bohm, grwf
from .hilbert import fidelity
from .measurement import sigma_tot_sq_demo
from .scenarios import experiments as ex
from .scenarios.engine import ValidationError, outcome_distribution, run, validate
from .scenarios.io import ConfigError, load_scenario, qstate_to_dict, transcript_to_dict
from .spacetime import Event, FlatFamily

__all__ = ["main", "build_parser", "RunConfig"]

EXIT_CONFIG = 2
EXIT_VALIDATION = 3
CHUNK = 10_000

EXPLAIN = {
    "eprb": "Two spins in the singlet measured along chosen axes on spacelike separated wings; "
    "prints the exact correlation and a sampled estimate.",
    "chsh": "Bell-CHSH combination of four singlet correlations at 0/90/45/135 degrees; "
    "exact value 2*sqrt(2) next to a Monte Carlo estimate.",
    "no-signaling": "Largest change of one wing's outcome statistics under measurements or field "
    "pulses on the other wing, over fixed and random two-spin states.",
    "sigma-tot-demo": "An ideal measurement of the squared total spin would let a local field pulse "
    "change the far wing's statistics: P(sigma_z(1) = -1) without and with the pulse.",
    "aa": "Nonlocal non-demolition measurement of all three total-spin components through "
    "probe pairs; readout sums and post-state fidelity.",
    "aa-displaced": "Single-axis probe procedure with the two local couplings far apart in time; "
    "shows the two-branch intermediate state and the restored final state.",
    "aa-foliation": "The probe procedure when a foliation crosses one wing entirely before the other, "
    "with a local spin measurement in between.",
    "hk": "Backward-light-cone reduction applied just before an EPRB pair of measurements; "
    "verification probability compared with ordinary simultaneity slices.",
    "monitor": "A primed single-axis procedure wrapped around an unprimed three-axis one; "
    "probability that the unprimed readouts are all zero.",
    "reduced-density": "Reduced spin-1 state on two spacelike surfaces through the same event, one "
    "before and one after the far wing's measurement.",
    "grwf": "Lattice flash process: sampled flash histories and inter-flash waiting times.",
    "rgrwf-density": "Relativistic single-flash density on the future of a seed flash, as a grid, "
    "with its normalization from light-cone quadrature.",
    "bohm": "Guidance-equation ensemble for an analytic Schrodinger packet; Kolmogorov-Smirnov "
    "comparison of transported samples with |psi|^2.",
    "hbdm": "Dirac plane-wave world line guided along the leaves of a tilted flat foliation.",
    "run": "Execute a JSON scenario file (schema 1): one sampled transcript plus the exact "
    "outcome distribution.",
}


@dataclass
class RunConfig:
    subcommand: str
    seed: int = 0
    samples: int | None = None
    out: Path | None = None
    fmt: str = "json"
    jobs: int = 1
    timing: bool = False
    options: dict = field(default_factory=dict)


@dataclass
class Report:
    scenario: str
    analytic: object = None
    estimate: object = None
    ci95: object = None
    details: dict = field(default_factory=dict)
    header: tuple = ()
    rows: list = field(default_factory=list)


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _matrix(m) -> dict:
    m = np.asarray(m)
    return {"real": np.real(m).tolist(), "imag": np.imag(m).tolist()}


def _mean_ci(values) -> tuple[float, list]:
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return mean, [mean - 1.96 * se, mean + 1.96 * se]


def _chunks(total: int) -> list[int]:
    full, rest = divmod(total, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _map_runs(fn, tasks, jobs):
    """Apply ``fn`` to ``tasks``; results stay in task order whatever ``jobs`` is."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


# ------------------------------------------------------------ subcommands


def _eprb_chunk(task):
    seed, i, n, a, b = task
    return ex.sample_eprb(ex.xz_direction(a), ex.xz_direction(b), n, np.random.default_rng([seed, i]))


def cmd_eprb(cfg: RunConfig) -> Report:
    a, b = cfg.options["angle_a"], cfg.options["angle_b"]
    n = cfg.samples or 100_000
    tasks = [(cfg.seed, i, m, a, b) for i, m in enumerate(_chunks(n))]
    pairs = np.concatenate(_map_runs(_eprb_chunk, tasks, cfg.jobs))
    products = pairs[:, 0] * pairs[:, 1]
    est, ci = _mean_ci(products)
    exact = ex.eprb_correlation(ex.xz_direction(a), ex.xz_direction(b))
    rep = Report("eprb", exact, est, ci)
    rep.details = {
        "angle_a_deg": a,
        "angle_b_deg": b,
        "samples": n,
        "p_equal_exact": (1 + exact) / 2,
        "equal_outcomes_sampled": int(np.sum(pairs[:, 0] == pairs[:, 1])),
    }
    counts = {}
    for x, y in pairs:
        counts[(x, y)] = counts.get((x, y), 0) + 1
    rep.header = ("outcome1", "outcome2", "count")
    rep.rows = [(int(x), int(y), counts.get((x, y), 0)) for x in (1, -1) for y in (1, -1)]
    return rep


def _chsh_chunk(task):
    seed, i, n = task
    rng = np.random.default_rng([seed, i])
    a, a2, b, b2 = ex.chsh_directions()
    out = []
    for x, y in ((a, b), (a, b2), (a2, b), (a2, b2)):
        p = ex.sample_eprb(x, y, n, rng)
        prod = p[:, 0] * p[:, 1]
        out.append((float(prod.sum()), float((prod * prod).sum())))
    return out


def cmd_chsh(cfg: RunConfig) -> Report:
    n = cfg.samples or 100_000
    tasks = [(cfg.seed, i, m) for i, m in enumerate(_chunks(n))]
    parts = _map_runs(_chsh_chunk, tasks, cfg.jobs)
    signs = (1.0, -1.0, 1.0, 1.0)
    a, a2, b, b2 = ex.chsh_directions()
    exact_e = [ex.eprb_correlation(x, y) for x, y in ((a, b), (a, b2), (a2, b), (a2, b2))]
    means, var = [], 0.0
    for k in range(4):
        s1 = sum(p[k][0] for p in parts)
        s2 = sum(p[k][1] for p in parts)
        mean = s1 / n
        means.append(mean)
        var += (s2 / n - mean * mean) * n / (n - 1) / n if n > 1 else 0.0
    est = abs(sum(s * m for s, m in zip(signs, means)))
    se = math.sqrt(var)
    rep = Report("chsh", ex.chsh(a, a2, b, b2), est, [est - 1.96 * se, est + 1.96 * se])
    rep.details = {"samples_per_setting": n, "stderr": se, "angles_deg": [0, 90, 45, 135]}
    rep.header = ("setting", "analytic", "estimate")
    rep.rows = [(name, e, m) for name, e, m in zip(("ab", "ab'", "a'b", "a'b'"), exact_e, means)]
    return rep


def cmd_no_signaling(cfg: RunConfig) -> Report:
    cases = ex.no_signaling_suite(cfg.seed, cfg.samples or 20)
    rep = Report("no-signaling", 0.0, max(c["deviation"] for c in cases))
    rep.details = {"cases": len(cases), "tolerance": 1e-12}
    rep.header = ("case", "max_marginal_deviation")
    rep.rows = [(c["case"], c["deviation"]) for c in cases]
    return rep


def cmd_sigma_tot(cfg: RunConfig) -> Report:
    res = sigma_tot_sq_demo()
    rep = Report("sigma-tot-demo", {"p_noflip": 0.0, "p_flip": 0.5}, res)
    rep.details = {"without_total_spin_measurement": sigma_tot_sq_demo(measure_total=False)}
    rep.header = ("variant", "p_sigma_z1_down")
    rep.rows = [("no_flip", res["p_noflip"]), ("flip", res["p_flip"])]
    return rep


def _sum_key(v):
    return list(v)


def cmd_aa(cfg: RunConfig) -> Report:
    initial = cfg.options["initial"]
    try:
        start = ex.named_ket(initial)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    res = ex.aa_simultaneous(initial, cfg.seed, strength=cfg.options["strength"])
    dist = ex.aa_readout_distribution(initial, strength=cfg.options["strength"])
    sums = [res.readouts[p] for p in sorted(res.readouts)]
    rep = Report("aa", [{"sums": _sum_key(k), "probability": v} for k, v in sorted(dist.items())], sums)
    rep.details = {
        "initial": initial,
        "sigma_total": res.sigma_total,
        "fidelity_to_initial": fidelity(res.post.spin_ket(), start),
        "post_state": qstate_to_dict(res.post),
    }
    rep.header = ("axis", "readout_sum", "sigma_total")
    rep.rows = [(ax, s, res.sigma_total.get(ax)) for ax, s in zip("xyz", sums)]
    return rep


def cmd_aa_displaced(cfg: RunConfig) -> Report:
    t = ex.aa_time_displaced(cfg.seed, cfg.options["strength"])
    mid = t.state("after:read2")
    weights = [float(np.vdot(v, v).real) for _, v in mid.terms]
    final = t.final
    rec = t.outcome("read1")
    rep = Report("aa-displaced", {"branch_weights": [0.5, 0.5], "readout_sum": 0.0}, {
        "branch_weights": weights,
        "readout_sum": rec.readout_sum,
    })
    rep.details = {
        "intermediate_state": qstate_to_dict(mid),
        "final_state": qstate_to_dict(final),
        "final_fidelity_to_singlet": fidelity(final.spin_ket(), ex.named_ket("singlet")),
    }
    rep.header = ("op", "value", "probability", "readout_sum")
    rep.rows = [(r.observable, r.eigenvalue, r.probability, r.readout_sum) for r in t.outcomes]
    return rep


def cmd_aa_foliation(cfg: RunConfig) -> Report:
    axis = cfg.options["axis"]
    s = ex.aa_foliation_scenario(axis, cfg.options["strength"])
    dist = outcome_distribution(s)
    t = run(s, cfg.seed)
    given = {k: v for k, v in dist.items() if dict(k).get("sgm2") == -1.0}
    p_up = sum(v for k, v in given.items() if dict(k)["sgm1"] == 1.0) / sum(given.values())
    rep = Report("aa-foliation", {"p_sigma_z1_up_given_sigma_z2_down": p_up}, {"readout_sum": t.outcome("read1").readout_sum})
    rep.details = {"axis": axis, "final_state": qstate_to_dict(t.final), "transcript": transcript_to_dict(t)}
    rep.header = ("op", "value", "probability", "readout_sum")
    rep.rows = [(r.observable, r.eigenvalue, r.probability, r.readout_sum) for r in t.outcomes]
    return rep


def cmd_hk(cfg: RunConfig) -> Report:
    res = ex.hk_refutation(epsilon=cfg.options["epsilon"])
    rep = Report("hk", {"p_standard": res["p_standard"], "p_lightcone": res["p_lightcone"]}, None)
    rep.details = {
        "mass": res["mass"],
        "branches": [
            {"outcomes": b["outcomes"], "weight": b["weight"], "p_allzero": b["p_allzero"]} for b in res["branches"]
        ],
    }
    rep.header = ("prescription", "p_verification")
    rep.rows = [("simultaneity", res["p_standard"]), ("light_cone", res["p_lightcone"])]
    return rep


def cmd_monitor(cfg: RunConfig) -> Report:
    variants = ("interleaved", "primed_first", "no_primed")
    res = {v: ex.monitoring_conflict(cfg.seed, v) for v in variants}
    rep = Report("monitor", {v: r["p_allzero_second_AA"] for v, r in res.items()}, None)
    rep.details = {v: {"sampled_sums": r["sampled_sums"]} for v, r in res.items()}
    rep.header = ("variant", "p_allzero")
    rep.rows = [(v, res[v]["p_allzero_second_AA"]) for v in variants]
    return rep


def cmd_reduced_density(cfg: RunConfig) -> Report:
    res = ex.reduced_density_demo(cfg.options["tilt"])
    rep = Report("reduced-density", {"sigma": _matrix(res["sigma"]), "xi": _matrix(res["xi"])}, None)
    rep.header = ("surface", "row", "col", "real", "imag")
    rep.rows = [
        (name, i, j, float(np.real(res[name][i, j])), float(np.imag(res[name][i, j])))
        for name in ("sigma", "xi")
        for i in range(2)
        for j in range(2)
    ]
    return rep


def _default_wave(sites: int = 8) -> grwf.LatticeWave:
    a = np.zeros(sites, complex)
    a[[1, sites // 2 + 1]] = 1
    b = np.zeros(sites, complex)
    b[[2, 3]] = [1, 1j]
    return grwf.LatticeWave.product(a, b)


def _grwf_run(task):
    seed, i, horizon, lam, alpha = task
    fl = grwf.sample_flashes(_default_wave(), horizon, grwf.GrwParams(lam, alpha), np.random.default_rng([seed, i]))
    return [(i, f.particle + 1, f.t, f.x) for f in fl]


def cmd_grwf(cfg: RunConfig) -> Report:
    lam, alpha, horizon = cfg.options["lam"], cfg.options["alpha"], cfg.options["horizon"]
    n = cfg.samples or 200
    rows = [r for runrows in _map_runs(_grwf_run, [(cfg.seed, i, horizon, lam, alpha) for i in range(n)], cfg.jobs) for r in runrows]
    # waiting times are censored at the horizon, so use exposure / count
    exposure = n * _default_wave().particles * horizon
    est = exposure / len(rows) if rows else None
    ci = [est * (1 - 1.96 / math.sqrt(len(rows))), est * (1 + 1.96 / math.sqrt(len(rows)))] if rows else None
    rep = Report("grwf", 1.0 / lam, est, ci)
    rep.details = {"runs": n, "horizon": horizon, "lam": lam, "alpha": alpha, "flashes": len(rows), "observable": "mean waiting time"}
    rep.header = ("run", "particle", "t", "x")
    rep.rows = rows
    return rep


def cmd_rgrwf(cfg: RunConfig) -> Report:
    p = grwf.GrwParams(cfg.options["lam"], cfg.options["alpha"])
    packet = grwf.RapidityPacket(0.0, cfg.options["width"])
    seed_flash = Event(0.0, 0.0)
    grid = grwf.rgrwf_grid(seed_flash, packet, p, cfg.options["t_max"], cfg.options["step"])
    total = grwf.rgrwf_lightcone_quadrature(seed_flash, packet, p)
    rep = Report("rgrwf-density", 1.0, total)
    rep.details = {
        "lam": p.lam,
        "alpha": p.alpha,
        "packet_width": packet.width,
        "grid_mass": float(grid["density"].sum() * cfg.options["step"] ** 2),
        "grid": {"t": grid["t"], "x": grid["x"], "density": grid["density"]},
    }
    rep.header = ("t", "x", "density")
    rep.rows = [
        (float(t), float(x), float(grid["density"][i, k]))
        for i, t in enumerate(grid["t"])
        for k, x in enumerate(grid["x"])
        if grid["density"][i, k] > 0
    ]
    return rep


def _packet(family: str):
    try:
        return bohm.packet_family(family)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_bohm(cfg: RunConfig) -> Report:
    psi = _packet(cfg.options["family"])
    t1 = cfg.options["t1"]
    n = cfg.samples or 10_000
    res = bohm.equivariance_test(psi, n, t1, seed=cfg.seed)
    rep = Report("bohm", None, res["statistic"])
    rep.details = {"family": cfg.options["family"], "t1": t1, "samples": n, **res}
    starts = bohm.sample_density(psi, cfg.options["trajectories"], 0.0, np.random.default_rng([cfg.seed, 1]))
    rep.header = ("trajectory", "s", "t", "x")
    ts = np.linspace(0.0, t1, 21)
    for k, q0 in enumerate(np.sort(starts)):
        tr = bohm.integrate(psi, float(q0), 0.0, t1)
        xs = np.interp(ts, tr.params, tr.positions)
        rep.rows += [(k, float(t), float(t), float(x)) for t, x in zip(ts, xs)]
    return rep


def cmd_hbdm(cfg: RunConfig) -> Report:
    chi, mom = cfg.options["rapidity"], cfg.options["momentum"]
    psi = bohm.DiracPacket((mom,), (1.0,))
    fol = FlatFamily.from_rapidity(chi, tuple(np.linspace(0.0, 5.0, 51)))
    (tr,) = bohm.hbdm_trajectories(fol, [psi], [Event(0.0, 0.0)])
    t, x = tr.positions[:, 0], tr.positions[:, 1]
    slope = float(np.polyfit(t, x, 1)[0])
    rep = Report("hbdm", mom / math.sqrt(mom * mom + 1.0), slope)
    rep.details = {"rapidity": chi, "momentum": mom, "struyve_frame": bohm.struyve_frame([psi])}
    rep.header = ("trajectory", "s", "t", "x")
    rep.rows = [(0, float(s), float(a), float(b)) for s, a, b in zip(tr.params, t, x)]
    return rep


def cmd_run(cfg: RunConfig) -> Report:
    s = load_scenario(cfg.options["scenario"])
    validate(s)
    t = run(s, cfg.seed)
    dist = outcome_distribution(s)
    rep = Report(s.name, [{"outcomes": dict(k), "probability": v} for k, v in dist.items()], None)
    rep.details = {"transcript": transcript_to_dict(t)}
    rep.header = ("op", "value", "probability", "readout_sum")
    rep.rows = [(r.observable, r.eigenvalue, r.probability, r.readout_sum) for r in t.outcomes]
    return rep


COMMANDS = {
    "eprb": cmd_eprb,
    "chsh": cmd_chsh,
    "no-signaling": cmd_no_signaling,
    "sigma-tot-demo": cmd_sigma_tot,
    "aa": cmd_aa,
    "aa-displaced": cmd_aa_displaced,
    "aa-foliation": cmd_aa_foliation,
    "hk": cmd_hk,
    "monitor": cmd_monitor,
    "reduced-density": cmd_reduced_density,
    "grwf": cmd_grwf,
    "rgrwf-density": cmd_rgrwf,
    "bohm": cmd_bohm,
    "hbdm": cmd_hbdm,
    "run": cmd_run,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="64-bit unsigned seed (default 0)")
    common.add_argument("--samples", type=_positive, help="sample or run count")
    common.add_argument("--out", type=Path, help="directory for report.json and the CSV table")
    common.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    common.add_argument("--jobs", type=_positive, default=1, help="worker processes for sample runs")
    common.add_argument("--explain", action="store_true", help="describe what the subcommand computes")
    common.add_argument("--timing", action="store_true", help="fill runtime_ms (output then varies between runs)")

    parser = argparse.ArgumentParser(prog="relcollapse", description="Collapse schemes on Minkowski space-time.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    cmds = {name: sub.add_parser(name, parents=[common], help=EXPLAIN[name].split(";")[0]) for name in COMMANDS}
    cmds["eprb"].add_argument("--angle-a", type=float, default=0.0, help="wing-1 axis, degrees in the x-z plane")
    cmds["eprb"].add_argument("--angle-b", type=float, default=0.0, help="wing-2 axis, degrees in the x-z plane")
    for name in ("aa", "aa-displaced", "aa-foliation"):
        cmds[name].add_argument("--strength", type=float, default=1.0, help="probe kick strength F")
    cmds["aa"].add_argument("--initial", default="singlet", help="singlet or a spin string such as ud")
    cmds["aa-foliation"].add_argument("--axis", choices=("x", "y", "z"), default="z")
    cmds["hk"].add_argument("--epsilon", type=float, default=0.1)
    cmds["reduced-density"].add_argument("--tilt", type=float, default=0.3)
    for name in ("grwf", "rgrwf-density"):
        cmds[name].add_argument("--lam", type=float, default=0.5, help="hit rate")
        cmds[name].add_argument("--alpha", type=float, default=1.5, help="localization width")
    cmds["grwf"].add_argument("--horizon", type=float, default=20.0)
    cmds["rgrwf-density"].add_argument("--width", type=float, default=0.5, help="packet width in rapidity")
    cmds["rgrwf-density"].add_argument("--t-max", type=float, default=10.0)
    cmds["rgrwf-density"].add_argument("--step", type=float, default=0.25)
    cmds["bohm"].add_argument("--family", choices=bohm.PACKET_FAMILIES, default="gaussian")
    cmds["bohm"].add_argument("--t1", type=float, default=1.0)
    cmds["bohm"].add_argument("--trajectories", type=_positive, default=10)
    cmds["hbdm"].add_argument("--rapidity", type=float, default=0.5)
    cmds["hbdm"].add_argument("--momentum", type=float, default=0.6)
    cmds["run"].add_argument("scenario", type=Path, help="scenario JSON file")
    return parser


def _render(rep: Report, cfg: RunConfig, runtime_ms) -> tuple[str, str]:
    doc = {
        "scenario": rep.scenario,
        "seed": cfg.seed,
        "analytic": rep.analytic,
        "estimate": rep.estimate,
        "ci95": rep.ci95,
        "runtime_ms": runtime_ms,
        "details": rep.details,
    }
    text = json.dumps(_jsonable(doc), indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(rep.header)
    w.writerows(_jsonable(rep.rows))
    return text, buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if ns.explain:
        print(f"{ns.subcommand}: {EXPLAIN[ns.subcommand]}")
        return 0
    reserved = {"subcommand", "seed", "samples", "out", "fmt", "jobs", "explain", "timing"}
    cfg = RunConfig(
        ns.subcommand,
        ns.seed,
        ns.samples,
        ns.out,
        ns.fmt,
        ns.jobs,
        ns.timing,
        {k: v for k, v in vars(ns).items() if k not in reserved},
    )
    start = time.perf_counter()
    try:
        rep = COMMANDS[cfg.subcommand](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    runtime = round((time.perf_counter() - start) * 1000, 3) if cfg.timing else None
    report, table = _render(rep, cfg, runtime)
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / "report.json").write_text(report)
        (cfg.out / f"{rep.scenario}.csv").write_text(table)
    sys.stdout.write(report if cfg.fmt == "json" else table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
