"""``qecmetro``: command-line entry point.

Examples::

    qecmetro qfi --model dephased-ghz --N 2 --p 0.9
    qecmetro sweep --mode phase --p 0.999 --m 5 --n-log 0 5.4 30 --plot
    qecmetro sweep --m-policy ceil_log --gamma 0.01 --n-log 1 6 11
    qecmetro verify --check mapping --m 5
    qecmetro scenario --kind I --N 2 --m 3 --p 0.99
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config

OUTPUT_ENV = "QECMETRO_OUTPUT_DIR"
DEFAULT_OUTPUT = "qecmetro_out"

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

CSV_HEADER = (
    "N,m,gamma,t_opt,f_per_t,delta_lambda_sqrtT,baseline_parallel,baseline_classical,"
    "baseline_transversal,heisenberg_retention,flags"
)


def fmt(x: float) -> str:
    """Twelve significant digits in scientific notation."""
    return "%.11e" % x


def output_dir(cfg: RunConfig, flag: str | None) -> Path:
    d = flag or cfg.output_dir or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT
    return Path(d)


def write_atomic(path: Path, data: bytes | str) -> Path:
    """Write via a temporary file in the same directory and rename into place."""
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


# -- commands ----------------------------------------------------------------


def cmd_qfi(cfg: RunConfig, args) -> int:
    from .channels import PauliChannel, apply_channel_all, block_hamiltonian
    from .linalg import ghz_state, pure_density
    from .qfi import qfi_dephased_ghz_phase, qfi_depolarized_ghz, qfi_spectral

    p = cfg.params
    if p.model == "dephased-ghz":
        closed = qfi_dephased_ghz_phase(p.p, p.N).value
        channel = PauliChannel.dephasing(p.p)
    else:
        closed = qfi_depolarized_ghz(p.p, p.N).value
        channel = PauliChannel.depolarizing(p.p)
    scale = 1.0 if p.t is None else p.t**2
    closed *= scale
    use_oracle = p.oracle if p.oracle is not None else p.N <= 8
    row = {"model": p.model, "N": p.N, "p": p.p, "t": p.t, "closed_form": closed}
    if use_oracle:
        if p.N > 12:
            raise ConfigError("spectral oracle is limited to N <= 12")
        rho = apply_channel_all(pure_density(ghz_state(p.N)), channel)
        spec = qfi_spectral(rho, block_hamiltonian(p.N, 1), 1.0 if p.t is None else p.t).value
        row["spectral"] = spec
        row["discrepancy"] = abs(closed - spec) / max(spec, np.finfo(float).eps)
    if cfg.format == "json":
        sys.stdout.write(_dump(row))
    else:
        keys = list(row)
        print(",".join(keys))
        print(",".join(fmt(v) if isinstance(v, float) else ("" if v is None else str(v)) for v in row.values()))
    return EXIT_OK


def _sweep_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        vals = [
            str(r.N), str(r.m), fmt(r.gamma), fmt(r.t_opt), fmt(r.f_per_t), fmt(r.delta_lambda_sqrtT),
            fmt(r.baseline_parallel), fmt(r.baseline_classical), fmt(r.baseline_transversal),
            fmt(r.heisenberg_retention), ";".join(r.flags),
        ]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def cmd_sweep(cfg: RunConfig, args) -> int:
    from .estimation import SweepConfig, fit_loglog_slope, scaling_sweep

    p = cfg.params
    sc = SweepConfig(
        n_values=tuple(p.n_values), m_policy=p.m_policy, m=p.m, mode=p.mode, gamma=p.gamma, p=p.p,
        t0=p.t0, t_max=p.t_max, numeric=p.numeric, workers=p.workers,
    )
    res = scaling_sweep(sc)
    rows = res.rows
    out = output_dir(cfg, args.output_dir)
    stem = args.name
    csv_path = write_atomic(out / f"{stem}.csv", _sweep_csv(rows))
    slopes = {}
    ns = [r.N for r in rows]
    if len(rows) > 1:
        for key in ("delta_lambda_sqrtT", "baseline_classical", "baseline_transversal"):
            ys = [getattr(r, key) for r in rows]
            if all(y > 0 and math.isfinite(y) for y in ys):
                slopes[key] = fit_loglog_slope(ns, ys)
    summary = {
        "config": cfg.to_dict(),
        "n_max_retention": res.n_max,
        "retention_threshold": res.meta["retention_threshold"],
        "loglog_slopes": slopes,
        "rows": [r.as_dict() for r in rows],
    }
    write_atomic(out / f"{stem}.json", _dump(summary))
    if p.plot:
        from .plotting import render_sweep_svg

        series = {
            "encoded": [r.delta_lambda_sqrtT for r in rows],
            "classical": [r.baseline_classical for r in rows],
            "transversal ref": [r.baseline_transversal for r in rows],
        }
        write_atomic(out / f"{stem}.svg", render_sweep_svg(ns, series, f"{p.mode} sweep, m policy {p.m_policy}"))
    print(f"rows: {len(rows)}")
    print(f"csv: {csv_path}")
    print(f"N_max at retention >= {res.meta['retention_threshold']}: {res.n_max}")
    for k, v in slopes.items():
        print(f"slope {k}: {v:.6f}")
    return EXIT_OK


def cmd_optimize(cfg: RunConfig, args) -> int:
    from .estimation import (
        closed_form_valid,
        default_bracket,
        encoded_objective,
        f_per_t_closed_form,
        optimize_interrogation_time,
        t_opt_closed_form,
    )

    p = cfg.params
    lo, hi = default_bracket(p.gamma)
    lo = p.t_min if p.t_min is not None else lo
    hi = p.t_max if p.t_max is not None else hi
    res = optimize_interrogation_time(encoded_objective(p.gamma, p.m, p.N), hi, lo)
    row = {"N": p.N, "m": p.m, "gamma": p.gamma, "t_opt_numeric": res.t_opt, "f_per_t_numeric": res.value,
           "at_boundary": res.at_boundary}
    if p.m >= 3:
        row["t_opt_closed"] = t_opt_closed_form(p.m, p.gamma, p.N)
        row["f_per_t_closed"] = f_per_t_closed_form(p.m, p.gamma, p.N)
        row["closed_valid"] = closed_form_valid(p.m, p.gamma, p.N)
    else:
        row["t_opt_closed"] = 1.0 / (2 * p.N * p.gamma)
        row["f_per_t_closed"] = p.N / (2 * p.gamma * math.e)
    row["t_rel_gap"] = abs(row["t_opt_closed"] - res.t_opt) / res.t_opt
    row["f_rel_gap"] = abs(row["f_per_t_closed"] - res.value) / res.value
    if cfg.format == "json":
        sys.stdout.write(_dump(row))
    else:
        for k, v in row.items():
            print(f"{k}: {fmt(v) if isinstance(v, float) else v}")
    return EXIT_OK


def cmd_codes(cfg: RunConfig, args) -> int:
    from .codes import concatenated_q, five_qubit_threshold, logical_flip_retention, logical_flip_tail

    p = cfg.params
    rows = []
    for pv in p.p_values:
        for m in p.m_values:
            rows.append({"p": pv, "m": m, "p_L": logical_flip_retention(pv, m),
                         "eps_L": 2 * logical_flip_tail(pv, m)})
    qrows = []
    for pv in p.p_values:
        q = (1 + 3 * pv) / 4
        qrows.append({"p": pv, "q": q, **{f"q_L{k}": concatenated_q(q, k) for k in range(p.levels + 1)}})
    thr = five_qubit_threshold()
    if cfg.format == "json":
        sys.stdout.write(_dump({"repetition": rows, "five_qubit": qrows, "threshold_q": thr}))
        return EXIT_OK
    print("p,m,p_L,eps_L")
    for r in rows:
        print(f"{fmt(r['p'])},{r['m']},{fmt(r['p_L'])},{fmt(r['eps_L'])}")
    print()
    keys = list(qrows[0]) if qrows else []
    print(",".join(keys))
    for r in qrows:
        print(",".join(fmt(r[k]) for k in keys))
    print()
    print(f"threshold_q,{fmt(thr)}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    from .checks import run_checks

    p = cfg.params
    results = run_checks(p.checks or None, tolerance_scale=p.tolerance_scale, m=p.m or None)
    ok = all(r.passed for r in results)
    report = {
        "passed": ok,
        "n_checks": len(results),
        "n_failed": sum(not r.passed for r in results),
        "tolerance_scale": p.tolerance_scale,
        "results": [r.as_dict() for r in results],
    }
    out = output_dir(cfg, args.output_dir)
    path = write_atomic(out / f"{args.name}.json", _dump(report))
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name} [{r.case}] error={r.error:.3e} tol={r.tolerance:.1e}")
    print(f"{'all checks passed' if ok else 'some checks FAILED'} ({len(results)} checks); report: {path}")
    return EXIT_OK if ok else EXIT_FAIL


def _scenario_spec(p):
    from .channels import LindbladSpec
    from .codes import CodeSpec
    from .scenario import ScenarioSpec

    code = CodeSpec.from_dict(p.code) if p.code else None
    kw = dict(t=p.t, theta=p.theta, lam=p.lam, code=code, trotter_steps=p.trotter_steps, noise_qubits=p.noise_qubits)
    if p.p is not None:
        return ScenarioSpec.with_retention(p.kind, p.N, p.m, p.p, p.noise, **kw)
    gamma = p.gamma or 0.0
    noise = {"dephasing": LindbladSpec.dephasing, "depolarizing": LindbladSpec.depolarizing,
             "transversal": LindbladSpec.transversal}[p.noise](gamma)
    return ScenarioSpec(p.kind, p.N, p.m, noise, **kw)


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def cmd_scenario(cfg: RunConfig, args) -> int:
    from .scenario import run_scenario

    spec = _scenario_spec(cfg.params)
    res = run_scenario(spec)
    row = {
        "kind": spec.kind.value,
        "N": spec.n_blocks,
        "m": spec.m,
        "code": spec.code.canonical().kind.value,
        "qfi_closed": res.qfi_closed.value,
        "closed_method": res.qfi_closed.method,
        "qfi_oracle": None if res.qfi_oracle is None else res.qfi_oracle.value,
        "discrepancy": res.discrepancy,
        "metadata": {k: _jsonable(v) for k, v in sorted(res.metadata.items())},
    }
    if cfg.format == "json":
        sys.stdout.write(_dump(row))
    else:
        for k, v in row.items():
            if k == "metadata":
                for mk, mv in v.items():
                    print(f"  {mk}: {fmt(mv) if isinstance(mv, float) else mv}")
            else:
                print(f"{k}: {fmt(v) if isinstance(v, float) else v}")
    return EXIT_OK


COMMANDS = {
    "qfi": cmd_qfi,
    "sweep": cmd_sweep,
    "optimize-time": cmd_optimize,
    "codes": cmd_codes,
    "verify": cmd_verify,
    "scenario": cmd_scenario,
}


# -- argument parsing --------------------------------------------------------


def _n_grid(args) -> list[int] | None:
    if args.n_log is not None:
        lo, hi, count = args.n_log
        if count < 1:
            raise ConfigError("--n-log count must be >= 1")
        grid = np.unique(np.rint(np.logspace(lo, hi, int(count))).astype(np.int64))
        return [int(n) for n in grid if n >= 1]
    return args.N


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qecmetro", description="Error-corrected metrology toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, default_name=None):
        sp.add_argument("--config", help="JSON run configuration; flags override its values")
        sp.add_argument("--output-dir", help=f"output directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
        sp.add_argument("--format", choices=("csv", "json", "text"))
        if default_name:
            sp.add_argument("--name", default=default_name, help="stem of the output files")

    sp = sub.add_parser("qfi", help="closed-form and spectral QFI of noisy GHZ states")
    common(sp)
    sp.add_argument("--model", choices=("dephased-ghz", "depolarized-ghz"))
    sp.add_argument("--N", type=int)
    sp.add_argument("--p", type=float)
    sp.add_argument("--t", type=float, help="frequency mode: multiply by t^2")
    sp.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=None)

    sp = sub.add_parser("sweep", help="scaling sweep over N (CSV, JSON, optional SVG)")
    common(sp, "sweep")
    sp.add_argument("--N", type=int, nargs="+", dest="N")
    sp.add_argument("--n-log", type=float, nargs=3, metavar=("LO", "HI", "COUNT"),
                    help="log-spaced grid 10^LO..10^HI, rounded to integers")
    sp.add_argument("--m-policy", choices=("fixed", "ceil_log"))
    sp.add_argument("--m", type=int)
    sp.add_argument("--mode", choices=("frequency", "phase"))
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--p", type=float)
    sp.add_argument("--t0", type=float)
    sp.add_argument("--t-max", type=float)
    sp.add_argument("--numeric", action=argparse.BooleanOptionalAction, default=None)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--plot", action=argparse.BooleanOptionalAction, default=None)

    sp = sub.add_parser("optimize-time", help="optimal interrogation time, numeric and closed form")
    common(sp)
    sp.add_argument("--N", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--t-max", type=float)
    sp.add_argument("--t-min", type=float)

    sp = sub.add_parser("codes", help="p_L, eps_L and q_L tables")
    common(sp)
    sp.add_argument("--p", type=float, nargs="+", dest="p_values")
    sp.add_argument("--m", type=int, nargs="+", dest="m_values")
    sp.add_argument("--levels", type=int)

    sp = sub.add_parser("verify", help="oracle cross-check suite")
    common(sp, "verify_report")
    sp.add_argument("--check", action="append", dest="checks")
    sp.add_argument("--m", type=int, nargs="+")
    sp.add_argument("--tolerance-scale", type=float)

    sp = sub.add_parser("scenario", help="run one end-to-end pipeline")
    common(sp)
    sp.add_argument("--kind", choices=("I", "II", "demo"))
    sp.add_argument("--N", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--noise", choices=("dephasing", "depolarizing", "transversal"))
    sp.add_argument("--p", type=float)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--t", type=float)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--lam", type=float)
    sp.add_argument("--code", help="repetition_phase:M, five_qubit_graph, concatenated:L or two_qubit_demo")
    sp.add_argument("--trotter-steps", type=int)
    sp.add_argument("--noise-qubits", choices=("all", "first"))
    return ap


_SKIP = {"command", "config", "output_dir", "format", "name", "n_log"}


def _code_arg(text: str | None):
    if text is None:
        return None
    kind, _, arg = text.partition(":")
    if kind == "repetition_phase":
        return {"kind": kind, "m": int(arg)}
    if kind == "concatenated":
        return {"kind": kind, "levels": int(arg)}
    return {"kind": kind}


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig(args.command)
    if cfg.command != args.command:
        raise ConfigError(f"config is for {cfg.command!r}, not {args.command!r}")
    overrides = {k: v for k, v in vars(args).items() if k not in _SKIP}
    if args.command == "sweep":
        overrides["n_values"] = _n_grid(args)
        overrides.pop("N", None)
    if args.command == "scenario":
        overrides["code"] = _code_arg(overrides.get("code"))
    cfg = cfg.with_overrides(overrides)
    if args.format:
        cfg.format = args.format
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
