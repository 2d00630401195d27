"""Command-line experiment driver.

Every subcommand is a pure function of its configuration: defaults, then a
``key=value`` file (``--config``), then ``--set key=value`` pairs, then the
named flags. Results go to a CSV (``--out``, stdout otherwise) and, with
``--out``, a JSON summary ``{config, constants, rows, runtime_s}`` next to it.

Exit codes: 0 ok, 1 acceptance failure, 2 usage error.
"""

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, annealed, environment, lattice, pde, scaling, spectral, stable, validation

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

COMMON = {"rho": 2.0, "gamma": 0.7, "kappa": 1.0, "dim": 1, "seed": 0, "workers": 1}

DEFAULTS = {
    "extremes": {**COMMON, "replicas": 10_000, "sides": [32.0, 128.0, 512.0], "c_factor": 1.2},
    "partition": {**COMMON, "L": 10, "l": 5, "r": 1},
    "spectral": {**COMMON, "replicas": 20, "tol": 1e-10},
    "pde": {**COMMON, "replicas": 10, "t": [1.0], "v_cap": 5.0, "tol": 1e-11},
    "scaling": {**COMMON, "rho": 1.5, "gamma": 1.0, "replicas": 100_000, "tau": [4.0, 8.0, 16.0, 32.0],
                "tol": 1e-8},
    "stable": {**COMMON, "replicas": 10_000, "t": [3.0, 4.0, 5.0], "h_samples": 100_000},
    "annealed": {**COMMON, "replicas": 50_000, "t": [1.0, 2.0, 4.0]},
    "validate": {"level": "quick", "seed": 0, "workers": 1, "tol": -1.0},
}

FLAG_KEYS = {"rho": "rho", "gamma": "gamma", "kappa": "kappa", "dim": "dim", "seed": "seed",
             "replicas": "replicas", "t": "t", "tau": "tau", "tol": "tol", "workers": "workers",
             "level": "level"}


def _coerce(key, raw, default):
    try:
        if isinstance(default, list):
            if isinstance(raw, (list, tuple)):
                return [float(x) for x in raw]
            return [float(x) for x in str(raw).replace(";", ",").split(",") if x.strip()]
        if isinstance(default, bool):
            return str(raw).lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(float(raw)) if float(raw).is_integer() else _bad(key, raw)
        if isinstance(default, float):
            return float(raw)
        return str(raw)
    except (TypeError, ValueError):
        raise UsageError(f"invalid value for '{key}': {raw!r}") from None


def _bad(key, raw):
    raise UsageError(f"invalid value for '{key}': {raw!r}")


def parse_config_text(text):
    """``key=value`` lines; blank lines and ``#`` comments ignored."""
    out = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {n} is not key=value: {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_config(command, overrides):
    """Merge ``overrides`` into the defaults of ``command``; unknown keys are a usage error."""
    if command not in DEFAULTS:
        raise UsageError(f"unknown subcommand '{command}'")
    cfg = {k: (list(v) if isinstance(v, list) else v) for k, v in DEFAULTS[command].items()}
    for key, raw in overrides.items():
        if key not in cfg:
            raise UsageError(f"unknown config key '{key}' for '{command}'")
        cfg[key] = _coerce(key, raw, DEFAULTS[command][key])
    return cfg


def _constants(cfg):
    if "rho" not in cfg:
        return {}
    try:
        c = scaling.ScalingConstants(cfg["rho"], cfg["gamma"], cfg["kappa"], cfg["dim"])
        return {k: (float(v) if isinstance(v, float) else v) for k, v in c.summary().items()}
    except scaling.DomainError as exc:
        raise UsageError(f"invalid constants: {exc}") from None


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------


@dataclass
class ExperimentRecord:
    command: str
    config: dict
    constants: dict
    columns: list
    rows: list
    runtime_s: float = 0.0
    version: str = __version__
    series: dict = field(default_factory=dict)  # plot-data tables keyed by kind
    exit_code: int = EXIT_OK

    def csv_text(self):
        return _csv(self.columns, self.rows)

    def summary(self):
        return {
            "config": self.config,
            "constants": self.constants,
            "rows": [dict(zip(self.columns, (_jsonable(v) for v in r))) for r in self.rows],
            "runtime_s": self.runtime_s,
            "version": self.version,
        }


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def _csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([validation._fmt(v) for v in r])
    return buf.getvalue()


PLOT_KINDS = {
    "h_expansion": ["tau", "h_solved", "h_expansion", "abs_diff"],
    "cf": ["t", "u", "re_emp", "im_emp", "re_stable", "im_stable"],
    "gumbel_ks": ["side", "ks"],
    "annealed_ratio": ["t", "kappa", "log_mc", "stderr", "log_ratio_unit", "log_ratio_kappa2"],
}


def emit_plot_data(record, kind):
    """Tidy CSV for ``kind``; a record without that series gives a header-only CSV."""
    if kind not in PLOT_KINDS:
        raise UsageError(f"unknown plot kind '{kind}'; choose from {sorted(PLOT_KINDS)}")
    rows = [] if record is None else record.series.get(kind, [])
    return _csv(PLOT_KINDS[kind], rows)


# ---------------------------------------------------------------------------
# pipelines
# ---------------------------------------------------------------------------


def _run_extremes(cfg):
    params = environment.WeibullParams(cfg["rho"])
    cols = ["side", "a", "b", "ks", "c", "freq_v1", "bound_v1", "freq_v2", "bound_v2"]
    rows = []
    for side in cfg["sides"]:
        n = int(side) ** cfg["dim"]
        rep = environment.extreme_value_diagnostics(params, n, cfg["replicas"], cfg["seed"],
                                                    c_factors=(cfg["c_factor"],), workers=cfg["workers"])
        e = rep["exceed"][0]
        rows.append([int(side), rep["a"], rep["b"], rep["ks"], e["c"], e["freq_v1"], e["bound_v1"], e["freq_v2"],
                     e["bound_v2"]])
    series = {"gumbel_ks": [[r[0], r[3]] for r in rows]}
    return cols, rows, series, EXIT_OK


def _run_partition(cfg):
    try:
        part = lattice.strip_box_partition(cfg["L"], cfg["l"], cfg["r"], cfg["dim"])
    except lattice.ScaleError as exc:
        raise UsageError(str(exc)) from None
    cols = ["index", "lo", "hi", "cardinality"]
    rows = []
    for idx, sites in sorted(part.main_boxes.items()):
        lo = " ".join(str(part.inner[i - 1][0]) for i in idx)
        hi = " ".join(str(part.inner[i - 1][1]) for i in idx)
        rows.append([" ".join(map(str, idx)), lo, hi, len(sites)])
    rows.append(["strip", "", "", len(part.strip)])
    return cols, rows, {}, EXIT_OK


def _run_spectral(cfg):
    cols = ["instance", "d", "sites", "kappa", "h", "lambda_ak", "lambda_dense", "rel_err", "residual", "ok"]
    rows, fail = [], False
    for i in range(cfg["replicas"]):
        inst = validation.random_instance(cfg["seed"], i, rho=cfg["rho"])
        p = spectral.RankOnePerturbation(inst.op, inst.x0, inst.h)
        pair = spectral.principal_eigenvalue_ak(p)
        H = spectral.assemble(inst.op)
        H[p.i0, p.i0] += inst.h
        top = float(np.linalg.eigvalsh(H)[-1])
        err = abs(pair.lambda0 - top) / (1 + abs(top))
        ok = err <= cfg["tol"]
        fail |= not ok
        rows.append([i, inst.op.d, inst.op.n, inst.op.kappa, inst.h, pair.lambda0, top, err, pair.residual, ok])
    return cols, rows, {}, EXIT_FAIL if fail else EXIT_OK


def _run_pde(cfg):
    cols = ["instance", "t", "log_mass_spectral", "log_mass_ode", "max_rel_diff"]
    rows = []
    for t in cfg["t"]:
        for i in range(cfg["replicas"]):
            inst = validation.random_instance(cfg["seed"], 1000 + i, rho=cfg["rho"], v_cap=cfg["v_cap"])
            a = pde.solve_spectral(inst.op, None, None, t)
            b = pde.solve_ode(inst.op, None, None, t, rtol=cfg["tol"])
            diff = float(np.max(np.abs(a.values - b.values)) / np.max(np.abs(a.values)))
            rows.append([i, t, pde.log_total_mass(a), pde.log_total_mass(b), diff])
    return cols, rows, {}, EXIT_OK


def _run_scaling(cfg):
    c = scaling.ScalingConstants(cfg["rho"], cfg["gamma"], cfg["kappa"], cfg["dim"])
    sample = scaling.sample_environments(cfg["replicas"], c.M, c.d, c.rho, cfg["seed"])
    cols = ["tau", "log_L", "h_solved", "h_expansion", "abs_diff", "residual", "explicit_cubic",
            "explicit_inverse"]
    rows = []
    for tau in cfg["tau"]:
        try:
            sol = scaling.solve_h(scaling.log_L_from_tau(tau, c), c, tol=cfg["tol"], sample=sample)
            terms = scaling.h_expansion(tau, c, sample=sample)
        except scaling.DomainError as exc:
            raise UsageError(f"tau={tau}: {exc}") from None
        try:
            cp = scaling.explicit_h_expansion(tau, c, "cubic")
            cr = scaling.explicit_h_expansion(tau, c, "inverse")
        except scaling.DomainError:
            cp = cr = float("nan")
        hx = float(sum(terms))
        rows.append([tau, sol.log_L, sol.h, hx, abs(sol.h - hx), sol.residual, cp, cr])
    series = {"h_expansion": [[r[0], r[2], r[3], r[4]] for r in rows]}
    return cols, rows, series, EXIT_OK


def _run_stable(cfg):
    if cfg["dim"] != 1:
        raise UsageError("the box-mass pipeline supports dim=1 only")
    c = scaling.ScalingConstants(cfg["rho"], cfg["gamma"], cfg["kappa"], 1)
    cols = ["t", "L", "l", "r", "n_t", "h", "cf_distance", "alpha_hat", "alpha", "n_tail_at_1"]
    rows, cf_rows = [], []
    for t in cfg["t"]:
        try:
            s = stable.simulate_mL(c, t, cfg["seed"], cfg["replicas"], workers=cfg["workers"],
                                   h_samples=cfg["h_samples"])
        except (lattice.ScaleError, ValueError) as exc:
            raise UsageError(f"t={t}: {exc}") from None
        dist, emp, ref = stable.cf_distance(s.Y, s.n_t, c.alpha, validation.CF_U_GRID, s.centering())
        tail = stable.tail_exponent_check(s)
        m = s.meta
        rows.append([t, m["L"], m["l"], m["r"], s.n_t, m["h"], dist, tail["alpha_hat"], c.alpha,
                     tail.get("n_tail_at_1", float("nan"))])
        for u, e, f in zip(validation.CF_U_GRID, emp, ref):
            cf_rows.append([t, u, e.real, e.imag, f.real, f.imag])
    return cols, rows, {"cf": cf_rows}, EXIT_OK


def _run_annealed(cfg):
    cols = ["t", "kappa", "H", "log_mc", "stderr", "log_formula_unit", "log_formula_kappa2",
            "log_ratio_unit", "log_ratio_kappa2"]
    rows = []
    for t in cfg["t"]:
        est = annealed.annealed_mean_mc(t, cfg["rho"], cfg["kappa"], cfg["dim"], cfg["replicas"], cfg["seed"],
                                        cfg["workers"])
        fp = annealed.annealed_asymptotic_formula(t, cfg["rho"], cfg["kappa"], cfg["dim"], "unit")
        fk = annealed.annealed_asymptotic_formula(t, cfg["rho"], cfg["kappa"], cfg["dim"], "kappa2")
        rows.append([t, cfg["kappa"], annealed.cumulant_H(t, cfg["rho"]), est.log_mean, est.stderr, fp, fk,
                     est.log_mean - fp, est.log_mean - fk])
    series = {"annealed_ratio": [[r[0], r[1], r[3], r[4], r[7], r[8]] for r in rows]}
    return cols, rows, series, EXIT_OK


def _run_validate(cfg):
    if cfg["level"] not in validation.LEVELS:
        raise UsageError(f"invalid value for 'level': {cfg['level']!r}")
    results = []
    for cid in sorted(validation.CRITERIA):
        kw = {"tol": cfg["tol"]} if cfg["tol"] >= 0 and cid in (1, 2, 3, 4) else {}
        results.append(validation.CRITERIA[cid](cfg["level"], cfg["seed"], cfg["workers"], **kw))
    results.append(validation.criterion_12(cfg["level"], cfg["seed"], cfg["workers"]))
    for r in results:
        print(r.line(), file=sys.stderr)
    text = validation.rows_to_csv(results)
    reader = csv.reader(io.StringIO(text))
    cols = next(reader)
    rows = [row for row in reader]
    failed = [r.cid for r in results if not r.passed]
    if failed:
        print("failed criteria: " + " ".join(map(str, failed)), file=sys.stderr)
    return cols, rows, {}, EXIT_FAIL if failed else EXIT_OK


PIPELINES = {
    "extremes": _run_extremes,
    "partition": _run_partition,
    "spectral": _run_spectral,
    "pde": _run_pde,
    "scaling": _run_scaling,
    "stable": _run_stable,
    "annealed": _run_annealed,
    "validate": _run_validate,
}


def run(command, cfg):
    """Execute one configured experiment and return its :class:`ExperimentRecord`."""
    constants = _constants(cfg)
    t0 = time.perf_counter()
    try:
        cols, rows, series, code = PIPELINES[command](cfg)
    except (environment.ParameterError, scaling.DomainError, stable.DomainError, lattice.ScaleError) as exc:
        raise UsageError(str(exc)) from None
    return ExperimentRecord(command, dict(cfg), constants, cols, rows, time.perf_counter() - t0, series=series,
                            exit_code=code)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser():
    p = _Parser(prog="pamlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"pamlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in PIPELINES:
        s = sub.add_parser(name)
        s.add_argument("--config", help="key=value file")
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one key")
        s.add_argument("--out", help="CSV path; a JSON summary is written alongside")
        s.add_argument("--plot", action="append", default=[], metavar="KIND",
                       help=f"also write plot data ({', '.join(PLOT_KINDS)})")
        for flag in ("rho", "gamma", "kappa", "tol"):
            s.add_argument(f"--{flag}")
        s.add_argument("--dim")
        s.add_argument("--seed")
        s.add_argument("--replicas")
        s.add_argument("--workers")
        s.add_argument("--t", help="comma-separated times")
        s.add_argument("--tau", help="comma-separated tau ladder")
        if name == "validate":
            s.add_argument("--level", choices=validation.LEVELS)
    return p


def main(argv=None):
    try:
        args = _parser().parse_args(argv)
        overrides = {}
        if args.config:
            try:
                overrides.update(parse_config_text(Path(args.config).read_text(encoding="utf-8")))
            except OSError as exc:
                raise UsageError(f"cannot read config: {exc}") from None
        for item in args.set:
            if "=" not in item:
                raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            overrides[k.strip()] = v.strip()
        for flag, key in FLAG_KEYS.items():
            value = getattr(args, flag, None)
            if value is not None:
                overrides[key] = value
        cfg = build_config(args.command, overrides)
        for kind in args.plot:
            if kind not in PLOT_KINDS:
                raise UsageError(f"unknown plot kind '{kind}'")
        record = run(args.command, cfg)
    except UsageError as exc:
        print(f"pamlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = record.csv_text()
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="utf-8")
        out.with_suffix(".json").write_text(json.dumps(record.summary(), indent=2, sort_keys=True) + "\n",
                                            encoding="utf-8")
        for kind in args.plot:
            out.with_name(f"{out.stem}.{kind}.csv").write_text(emit_plot_data(record, kind), encoding="utf-8")
    else:
        sys.stdout.write(text)
        for kind in args.plot:
            sys.stdout.write(emit_plot_data(record, kind))
    return record.exit_code


if __name__ == "__main__":
    sys.exit(main())
