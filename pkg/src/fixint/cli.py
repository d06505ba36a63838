"""
Command-line runner for the transform and Schrödinger experiments.

Usage::

    python -m fixint EXPERIMENT [--config FILE] [--key value ...]

Settings come from a flat ``key = value`` file (``#`` starts a comment) and
are overridden by flags. Results are written as CSV to ``--out`` (default:
``$FIXINT_OUTPUT_DIR`` or the working directory).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import qft, schrodinger
from .interaction import PhasePolynomial, fit_phase_polynomial, model_from_config, pair_coefficient
from .schedule import build_decoupling_schedule, compensation_for_decoupling, schedule_unitary

EXPERIMENTS = ("qft-fidelity", "decouple-demo", "phase-gate", "schrodinger", "trotter-study")
OUTPUT_ENV = "FIXINT_OUTPUT_DIR"

_INT = int
_FLOAT = float
_STR = str

# key -> converter; everything the runner understands
KEYS = {
    "l": _INT,
    "out": _STR,
    "seed": _INT,
    "seeds": _STR,
    "jobs": _INT,
    # transform
    "mode": _STR,
    "direction": _STR,
    "lambda": _FLOAT,
    "threshold": _FLOAT,
    "separated": _STR,
    "duration": _FLOAT,
    "pair": _STR,
    "c": _FLOAT,
    # coupling model
    "form": _STR,
    "rho": _FLOAT,
    "rho1": _FLOAT,
    "rho2": _FLOAT,
    "rho3": _FLOAT,
    "rho4": _FLOAT,
    "decay": _STR,
    "rho0": _FLOAT,
    "screening": _FLOAT,
    "alpha": _FLOAT,
    "table": _STR,
    "positions": _STR,
    # wave packets
    "potential": _STR,
    "m": _FLOAT,
    "omega": _FLOAT,
    "f": _FLOAT,
    "sigma": _FLOAT,
    "q0": _FLOAT,
    "p0": _FLOAT,
    "dt": _FLOAT,
    "t": _FLOAT,
    "convention": _STR,
    "backend": _STR,
    "dump_times": _STR,
    "halvings": _INT,
}

DEFAULTS = {
    "seed": 0,
    "seeds": "1",
    "jobs": 1,
    "mode": "oracle",
    "direction": "inverse",
    "lambda": 2000.0,
    "threshold": math.pi / 2**6,
    "duration": 1.0,
    "c": math.pi / 4,
    "potential": "free",
    "m": 1.0,
    "omega": 1.0,
    "f": 0.0,
    "sigma": 1.0,
    "q0": 0.0,
    "p0": 0.0,
    "dt": 1 / 64,
    "t": 1.0,
    "convention": "centered",
    "backend": "reference",
    "halvings": 2,
}

MODEL_KEYS = ("form", "rho", "rho1", "rho2", "rho3", "rho4", "decay", "rho0", "screening", "alpha", "table", "positions")

MODES = {
    "oracle": qft.Mode.ORACLE_COMPENSATED,
    "unit-yukawa": qft.Mode.UNIT_YUKAWA,
    "general": qft.Mode.GENERAL_DIAGONAL,
    "approximate": None,
}


class ConfigError(Exception):
    """Bad or missing setting; the message names the key."""


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if not math.isfinite(x):
        raise FloatingPointError("non-finite value in output")
    return f"{x:.17g}"


def to_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def read_config_file(path) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve(raw: dict[str, str]) -> dict:
    """Check keys and convert values, filling defaults."""
    cfg = {}
    for key, value in raw.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key: {key}")
        try:
            cfg[key] = KEYS[key](value)
        except ValueError:
            raise ConfigError(f"invalid value for {key}: {value!r}") from None
    if "l" not in cfg:
        raise ConfigError("missing: l")
    for key, value in DEFAULTS.items():
        cfg.setdefault(key, value)
    cfg["seed_list"] = _seed_list(cfg)
    return cfg


def _seed_list(cfg) -> list[int]:
    text = str(cfg["seeds"]).strip()
    try:
        if "," in text:
            seeds = [int(s) for s in text.split(",") if s.strip()]
        else:
            count = int(text)
            if count < 1:
                raise ValueError
            seeds = list(range(cfg["seed"], cfg["seed"] + count))
    except ValueError:
        raise ConfigError(f"invalid value for seeds: {text!r}") from None
    return sorted(set(seeds))


def _int_pair(cfg, key, default):
    text = cfg.get(key)
    if text is None:
        return default
    try:
        j, k = (int(s) for s in str(text).split(","))
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {text!r}") from None
    return j, k


def _model(cfg):
    sub = {k: str(cfg[k]) for k in MODEL_KEYS if k in cfg}
    return model_from_config(sub, cfg["l"])


def _map_seeds(fn, jobs_args, jobs):
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, jobs_args))
    return [fn(a) for a in jobs_args]


def _qft_row(args):
    cfg, seed = args
    l = cfg["l"]
    direction = qft.Direction(cfg["direction"])
    if cfg["mode"] == "approximate":
        plan = qft.approximate_qft_plan(l, direction, cfg["threshold"])
    else:
        plan = qft.build_qft_plan(l, direction, MODES[cfg["mode"]], _model(cfg), cfg["lambda"], seed)
    fid = qft.plan_fidelities(plan)
    return seed, float(fid.mean()), float(fid.min())


def run_qft_fidelity(cfg):
    if cfg["mode"] not in MODES:
        raise ConfigError(f"invalid value for mode: {cfg['mode']!r}")
    stochastic = cfg["mode"] in ("unit-yukawa", "general")
    lam = cfg["lambda"] if stochastic else 0.0
    results = _map_seeds(_qft_row, [(cfg, s) for s in cfg["seed_list"]], cfg["jobs"])
    rows = [(cfg["l"], cfg["mode"], lam, s, mean, low) for s, mean, low in sorted(results)]
    header = ("l", "mode", "lambda", "seed", "mean_fidelity", "min_fidelity")
    return {"qft_fidelity.csv": to_csv(header, rows)}


def _diagonal_phases(schedule, reference: PhasePolynomial):
    """Phases ``-arg U_aa``, unwrapped towards ``reference``."""
    u = schedule_unitary(schedule)
    ref = reference.table()
    return ref - np.angle(np.diag(u) * np.exp(1j * ref))


def _decouple_fit(args):
    cfg, seed = args
    model = _model(cfg)
    sep = _int_pair(cfg, "separated", (cfg["l"] - 1, cfg["l"] - 2))
    sched = build_decoupling_schedule(model, sep, cfg["lambda"], cfg["duration"], seed)
    pred = _decoupling_prediction(model, sep, cfg["duration"])
    fit, _ = fit_phase_polynomial(_diagonal_phases(sched, pred), cfg["l"])
    return seed, fit


def _decoupling_prediction(model, sep, duration):
    own = PhasePolynomial(model.num_qubits, quadratic={sep: pair_coefficient(model, *sep)}) * duration
    return own - compensation_for_decoupling(model, sep, duration)


def run_decouple_demo(cfg):
    l = cfg["l"]
    model = _model(cfg)
    sep = _int_pair(cfg, "separated", (l - 1, l - 2))
    pred = _decoupling_prediction(model, sep, cfg["duration"])
    fits = [fit for _, fit in sorted(_map_seeds(_decouple_fit, [(cfg, s) for s in cfg["seed_list"]], cfg["jobs"]), key=lambda r: r[0])]
    rows = [("constant", -1, -1, pred.constant, np.mean([f.constant for f in fits]))]
    for q in range(l):
        rows.append(("linear", q, -1, pred.linear[q], np.mean([f.linear[q] for f in fits])))
    for p, q in model.pairs():
        rows.append(("quadratic", p, q, pred.quadratic.get((p, q), 0.0), np.mean([f.quadratic.get((p, q), 0.0) for f in fits])))
    header = ("term", "p", "q", "predicted", "measured")
    return {"decouple_demo.csv": to_csv(header, rows)}


def _phase_gate_row(args):
    cfg, seed = args
    model = _model(cfg)
    j, k = _int_pair(cfg, "pair", (1, 0))
    target = PhasePolynomial(cfg["l"], quadratic={(max(j, k), min(j, k)): cfg["c"]})
    sched = qft.quadratic_phase_gate(target, model, cfg["lambda"], seed)
    fit, _ = fit_phase_polynomial(_diagonal_phases(sched, target), cfg["l"])
    achieved = fit.quadratic.get((max(j, k), min(j, k)), 0.0)
    affine = max(abs(fit.constant), float(np.max(np.abs(fit.linear))))
    return seed, max(j, k), min(j, k), cfg["c"], achieved, affine


def run_phase_gate(cfg):
    rows = sorted(_map_seeds(_phase_gate_row, [(cfg, s) for s in cfg["seed_list"]], cfg["jobs"]))
    header = ("seed", "j", "k", "target", "achieved", "affine_residual")
    return {"phase_gate.csv": to_csv(header, rows)}


def _potential(cfg):
    kind = cfg["potential"]
    if kind == "free":
        return schrodinger.Potential.free()
    if kind == "linear":
        return schrodinger.Potential.linear(cfg["f"])
    if kind in ("harmonic", "quadratic"):
        return schrodinger.Potential.harmonic(cfg["m"], cfg["omega"])
    raise ConfigError(f"invalid value for potential: {kind!r}")


def _steps_at(times, dt):
    out = []
    for t in times:
        n = round(t / dt)
        if abs(n * dt - t) > 1e-9 * max(1.0, t):
            raise ConfigError(f"invalid value for dump_times: {t} is not a multiple of dt")
        out.append(n)
    return out


def run_schrodinger(cfg):
    l = cfg["l"]
    pot = _potential(cfg)
    m = cfg["m"]
    config = schrodinger.TrotterConfig(cfg["dt"], cfg["t"], cfg["convention"])
    start = schrodinger.make_gaussian(l, cfg["q0"], cfg["p0"], cfg["sigma"])
    dump_times = [cfg["t"]]
    if cfg.get("dump_times"):
        try:
            dump_times = sorted(float(s) for s in str(cfg["dump_times"]).split(","))
        except ValueError:
            raise ConfigError(f"invalid value for dump_times: {cfg['dump_times']!r}") from None
    dump_steps = dict(zip(_steps_at(dump_times, cfg["dt"]), dump_times))
    files = {}
    obs_rows = []

    def record(step, t, grid):
        o = schrodinger.observables(grid)
        obs_rows.append((step, t, o.norm, o.q_mean, o.q_width, o.p_mean, o.p_width, schrodinger.energy(grid, pot, m)))
        if step in dump_steps:
            files[f"wavefunction_{len(files):03d}.csv"] = schrodinger.wavefunction_csv(grid, dump_steps[step])

    record(0, 0.0, start)
    final = schrodinger.evolve(start, pot, m, config, cfg["backend"], callback=record)
    header = ("step", "t", "norm", "q_mean", "q_width", "p_mean", "p_width", "energy")
    files["observables.csv"] = to_csv(header, obs_rows)
    summary = []
    if pot.kind is schrodinger.PotentialKind.FREE:
        sigma = cfg["sigma"]
        expected = sigma * math.sqrt(1 + (cfg["t"] / (2 * m * sigma**2)) ** 2)
        width = schrodinger.observables(final).q_width
        summary.append(f"width {width:.17g} analytic {expected:.17g} rel_error {abs(width / expected - 1):.3e}")
    return files, summary


def run_trotter_study(cfg):
    l = cfg["l"]
    pot = _potential(cfg)
    m = cfg["m"]
    start = schrodinger.make_gaussian(l, cfg["q0"], cfg["p0"], cfg["sigma"])
    dts = [cfg["dt"] / 2**h for h in range(cfg["halvings"] + 1)]
    if pot.kind is schrodinger.PotentialKind.FREE:
        ref = schrodinger.analytic_free_gaussian(cfg["t"], cfg["q0"], cfg["p0"], cfg["sigma"], m, l)
    else:
        fine = schrodinger.TrotterConfig(dts[-1] / 64, cfg["t"], cfg["convention"])
        ref = schrodinger.evolve(start, pot, m, fine)
    rows = []
    for dt in dts:
        out = schrodinger.evolve(start, pot, m, schrodinger.TrotterConfig(dt, cfg["t"], cfg["convention"]), cfg["backend"])
        rows.append((dt, schrodinger.l2_distance(out, ref)))
    return {"trotter_study.csv": to_csv(("delta_t", "l2_error"), rows)}


RUNNERS = {
    "qft-fidelity": run_qft_fidelity,
    "decouple-demo": run_decouple_demo,
    "phase-gate": run_phase_gate,
    "schrodinger": run_schrodinger,
    "trotter-study": run_trotter_study,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _parser():
    p = _Parser(prog="fixint", description="Fixed-interaction transform and wave-packet experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="flat key = value settings file")
    for key in KEYS:
        flag = "--" + key.replace("_", "-")
        p.add_argument(flag, dest=key, default=None, metavar="VALUE")
    return p


def parse(argv) -> tuple[str, dict]:
    args, unknown = _parser().parse_known_args(argv)
    if unknown:
        raise ConfigError(f"unknown key: {unknown[0].lstrip('-').split('=')[0]}")
    raw = read_config_file(args.config) if args.config else {}
    for key in KEYS:
        value = getattr(args, key)
        if value is not None:
            raw[key] = value
    return args.experiment, resolve(raw)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        experiment, cfg = parse(argv)
        print("seeds: " + " ".join(str(s) for s in cfg["seed_list"]))
        result = RUNNERS[experiment](cfg)
        files, summary = result if isinstance(result, tuple) else (result, [])
        out_dir = Path(cfg.get("out") or os.environ.get(OUTPUT_ENV) or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            with open(out_dir / name, "w", newline="\n") as fh:
                fh.write(text)
            print(f"wrote {out_dir / name}")
        for line in summary:
            print(line)
    except ConfigError as exc:
        print(f"fixint: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"fixint: invalid config: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, OSError) as exc:
        print(f"fixint: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
