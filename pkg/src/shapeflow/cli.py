"""Command-line front end.

Commands
--------
``evolve``      run a shape trajectory and write a CSV plus a conservation
                report JSON.
``check``       execute one identity-check suite and emit pass/fail JSON.
``kp``          sweep a grid of generalized times: wave coefficient,
                its first derivative, KP residual, and tau per row.
``tau``         tau determinant over a time grid.
``graph-dump``  build a graph operator from shape coefficients and dump its
                deterministic JSON form.

All outputs are deterministic given the config and seed: floats are written
with ``repr`` so re-runs produce byte-identical files.  Exit codes: 0
success, 1 check failure, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import dataclasses
import itertools
import json
import os
import sys

import numpy as np

from . import checks
from .driver import HerglotzDriver
from .evolution import ShapeState, StepRejected, evolve
from .grassmannian import step2_graph
from .kp import (
    ABForm,
    NearSingularA,
    SingularSystem,
    kp_residual,
    omega1_and_partials,
    tau,
)

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


class ConfigError(ValueError):
    """A config file is missing, malformed, or violates an invariant."""


# ---------------------------------------------------------------------------
# config plumbing


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Validated trajectory-run configuration."""

    driver: HerglotzDriver
    horizon: float
    step: float
    order: int
    m_neg: int
    n_psi: int
    seed: int
    psibar0: np.ndarray

    @classmethod
    def from_dict(cls, raw, order=None, step=None, horizon=None) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        if "driver" not in raw:
            raise ConfigError("config needs a 'driver' object")
        try:
            driver = HerglotzDriver.from_json(json.dumps(raw["driver"]))
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"bad driver config: {exc}") from exc
        report = driver.validate()
        if not report["ok"]:
            raise ConfigError("; ".join(report["problems"]))
        horizon = float(horizon if horizon is not None else raw.get("horizon", 1.0))
        step = float(step if step is not None else raw.get("step", 1e-3))
        order = int(order if order is not None else raw.get("order", 16))
        m_neg = int(raw.get("m_neg", 8))
        n_psi = int(raw.get("n_psi", 8))
        seed = int(raw.get("seed", 0))
        if horizon <= 0 or step <= 0 or order <= 0:
            raise ConfigError("horizon, step, and order must be positive")
        if m_neg < 0 or n_psi < 0:
            raise ConfigError("psibar window bounds must be nonnegative")
        width = m_neg + n_psi + 1
        if "psibar0" in raw:
            psibar0 = _complex_vector(raw["psibar0"], "psibar0")
            if psibar0.size != width:
                raise ConfigError(
                    f"psibar0 must have {width} entries for window "
                    f"[-{m_neg}, {n_psi}], got {psibar0.size}"
                )
        else:
            rng = np.random.default_rng(seed)
            scale = 1.0 / (1.0 + np.abs(np.arange(-m_neg, n_psi + 1)))
            psibar0 = scale * (rng.standard_normal(width) + 1j * rng.standard_normal(width))
        return cls(
            driver=driver,
            horizon=horizon,
            step=step,
            order=order,
            m_neg=m_neg,
            n_psi=n_psi,
            seed=seed,
            psibar0=psibar0,
        )


def _load_config(path) -> dict:
    if not path:
        raise ConfigError("this command requires --config <path>")
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _complex_vector(values, label) -> np.ndarray:
    """Accept [x, ...] or [[re, im], ...] JSON lists."""
    out = []
    if not isinstance(values, (list, tuple)):
        raise ConfigError(f"{label} must be a JSON list")
    for v in values:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ConfigError(f"{label} entries must be numbers or [re, im]")
            out.append(complex(float(v[0]), float(v[1])))
        elif isinstance(v, (int, float)):
            out.append(complex(v))
        else:
            raise ConfigError(f"{label} entries must be numbers or [re, im]")
    return np.asarray(out, dtype=complex)


def _out_path(args, filename) -> str:
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, filename)


def _fmt(value: float) -> str:
    return repr(float(value))


# ---------------------------------------------------------------------------
# evolve


def _koebe_applicable(driver: HerglotzDriver) -> bool:
    """True for the single-piece unit atom at angle zero (closed form known)."""
    if len(driver.pieces) != 1:
        return False
    piece = driver.pieces[0]
    if piece.t_start != 0.0 or len(piece.atoms) != 1:
        return False
    atom = piece.atoms[0]
    return atom.theta == 0.0 and atom.mu == 1.0


def _koebe_errors(record) -> list:
    """Per-step implicit-solution error K(e^-t f(z)) - e^-t K(z) on |z| <= 0.2."""
    z = 0.2 * np.exp(2j * np.pi * np.arange(10) / 10)

    def kb(x):
        return x / (1.0 + x) ** 2

    errs = []
    for state in record.states:
        fz = z * state.f_over_z().evaluate(z)
        w = np.exp(-state.t) * fz
        errs.append(float(np.abs(kb(w) - np.exp(-state.t) * kb(z)).max()))
    return errs


def cmd_evolve(args) -> int:
    config = RunConfig.from_dict(
        _load_config(args.config), order=args.order, step=args.step, horizon=args.horizon
    )
    state0 = ShapeState(
        0.0,
        np.zeros(config.order, dtype=complex),
        config.psibar0.copy(),
        m_neg=config.m_neg,
    )
    record = evolve(state0, config.driver, config.horizon, config.step)

    extra = {}
    koebe_max = None
    if _koebe_applicable(config.driver):
        errs = _koebe_errors(record)
        extra["koebe_error"] = errs
        koebe_max = max(errs)

    csv_path = _out_path(args, "trajectory.csv")
    record.to_csv(csv_path, extra_columns=extra)

    # H + G_0 is the conserved combination, with G_0 = sum_k k c_k psibar_k
    kmax = min(config.n_psi, config.order)
    g0 = np.array(
        [
            sum(k * s.c[k - 1] * s.psi(k) for k in range(1, kmax + 1))
            for s in record.states
        ]
    )
    energy = record.hamiltonian + g0
    report = {
        "drift": record.drift_report(),
        "energy_invariant_drift": float(np.abs(energy - energy[0]).max()),
        "horizon": config.horizon,
        "step": config.step,
        "order": config.order,
        "m_neg": config.m_neg,
        "n_psi": config.n_psi,
        "seed": config.seed,
        "steps": len(record.states),
        "trajectory_csv": os.path.basename(csv_path),
    }
    if koebe_max is not None:
        report["koebe_max_error"] = koebe_max
    report_path = _out_path(args, "conservation.json")
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

    worst = max(report["drift"].values()) if report["drift"] else 0.0
    print(
        f"evolved {len(record.states)} steps to t={config.horizon}; "
        f"max generating-coefficient drift {worst:.3e}; wrote {csv_path}, {report_path}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# check


def cmd_check(args) -> int:
    records = checks.run_suite(args.suite)
    passed = all(r["passed"] for r in records)
    payload = {"suite": args.suite, "passed": passed, "results": records}
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.out:
        path = _out_path(args, f"check_{args.suite}.json")
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK if passed else EXIT_CHECK_FAILURE


# ---------------------------------------------------------------------------
# kp / tau sweeps


def _read_snapshot(path, at_t) -> np.ndarray:
    """Shape coefficients from a trajectory CSV row nearest to at_t."""
    try:
        with open(path) as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read snapshot CSV: {exc}") from exc
    if len(rows) < 2:
        raise ConfigError("snapshot CSV has no data rows")
    header = rows[0]
    try:
        t_col = header.index("t")
    except ValueError:
        raise ConfigError("snapshot CSV lacks a 't' column")
    orders = [
        int(name[len("re_c_") :]) for name in header if name.startswith("re_c_")
    ]
    if not orders:
        raise ConfigError("snapshot CSV lacks re_c_*/im_c_* columns")
    order = max(orders)
    data = rows[1:]
    times = np.array([float(r[t_col]) for r in data])
    pick = data[int(np.abs(times - float(at_t)).argmin())]
    c = np.empty(order, dtype=complex)
    for n in range(1, order + 1):
        re = float(pick[header.index(f"re_c_{n}")])
        im = float(pick[header.index(f"im_c_{n}")])
        c[n - 1] = complex(re, im)
    return c


def _shape_from_source(raw) -> np.ndarray:
    source = raw.get("f_source")
    if not isinstance(source, dict):
        raise ConfigError("config needs an 'f_source' object")
    if "c" in source:
        return _complex_vector(source["c"], "f_source.c")
    if "snapshot_csv" in source:
        if "at_t" not in source:
            raise ConfigError("snapshot f_source needs 'at_t'")
        return _read_snapshot(source["snapshot_csv"], source["at_t"])
    raise ConfigError("f_source must supply 'c' or 'snapshot_csv'")


def _time_rows(raw) -> list:
    if "t_rows" in raw:
        rows = raw["t_rows"]
        if not isinstance(rows, list) or not rows:
            raise ConfigError("t_rows must be a nonempty list of [t1, t2, t3] rows")
        out = []
        for row in rows:
            if not isinstance(row, list) or not (1 <= len(row) <= 3):
                raise ConfigError("each t_rows entry must list 1 to 3 times")
            vals = tuple(float(v) for v in row)
            out.append(vals + (0.0,) * (3 - len(vals)))
        return out
    if "t_grid" in raw:
        grid = raw["t_grid"]
        if not isinstance(grid, dict):
            raise ConfigError("t_grid must be an object with t1/t2/t3 lists")
        axes = []
        for key in ("t1", "t2", "t3"):
            vals = grid.get(key, [0.0])
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"t_grid.{key} must be a nonempty list")
            axes.append([float(v) for v in vals])
        return [row for row in itertools.product(*axes)]
    raise ConfigError("config needs 't_rows' or 't_grid'")


def _kp_ints(raw, args) -> tuple:
    n = int(raw.get("n", 1))
    N = int(args.order if args.order is not None else raw.get("N", 16))
    if not 1 <= n <= 3:
        raise ConfigError("graph order n must be 1, 2, or 3")
    if N < max(n, 1):
        raise ConfigError("truncation N must be at least n")
    return n, N


def _kp_cell(payload):
    c, op, trow, N, pair = payload
    parts = omega1_and_partials(ABForm.build(c, trow, N))
    omega1 = parts[(0, 0, 0)]
    lambda1 = -parts[(1, 0, 0)]
    residual = kp_residual(c, trow, N)
    tau_value = tau(op, trow, N)
    row = [
        _fmt(trow[0]),
        _fmt(trow[1]),
        _fmt(trow[2]),
        _fmt(omega1.real),
        _fmt(omega1.imag),
        _fmt(lambda1.real),
        _fmt(lambda1.imag),
        _fmt(residual),
        _fmt(tau_value.real),
        _fmt(tau_value.imag),
    ]
    if pair:
        row.append(_fmt(kp_residual(c, trow, 2 * N)))
    return row


def _run_cells(cells, parallel):
    if parallel > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(_kp_cell, cells))
    return [_kp_cell(cell) for cell in cells]


def cmd_kp(args) -> int:
    raw = _load_config(args.config)
    c = _shape_from_source(raw)
    n, N = _kp_ints(raw, args)
    rows = _time_rows(raw)
    pair = bool(raw.get("convergence_pair", False))
    op = step2_graph(c, n, N)

    header = [
        "t1",
        "t2",
        "t3",
        "re_omega1",
        "im_omega1",
        "re_lambda1",
        "im_lambda1",
        "residual",
        "re_tau",
        "im_tau",
    ]
    if pair:
        header.append(f"residual_{2 * N}")
    cells = [(c, op, trow, N, pair) for trow in rows]
    results = _run_cells(cells, args.parallel)

    path = _out_path(args, "kp_sweep.csv")
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in results:
            fh.write(",".join(row) + "\n")
    print(f"wrote {len(results)} rows to {path}")
    return EXIT_OK


def cmd_tau(args) -> int:
    raw = _load_config(args.config)
    c = _shape_from_source(raw)
    n, N = _kp_ints(raw, args)
    rows = _time_rows(raw)
    op = step2_graph(c, n, N)

    path = _out_path(args, "tau.csv")
    with open(path, "w") as fh:
        fh.write("t1,t2,t3,re_tau,im_tau\n")
        for trow in rows:
            value = tau(op, trow, N)
            fh.write(
                ",".join(
                    [
                        _fmt(trow[0]),
                        _fmt(trow[1]),
                        _fmt(trow[2]),
                        _fmt(value.real),
                        _fmt(value.imag),
                    ]
                )
                + "\n"
            )
    print(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# graph-dump


def cmd_graph_dump(args) -> int:
    raw = _load_config(args.config)
    if "c" not in raw:
        raise ConfigError("graph-dump config needs a 'c' list")
    c = _complex_vector(raw["c"], "c")
    n = int(raw.get("n", 1))
    N = int(args.order if args.order is not None else raw.get("N", max(len(c), n)))
    if not 1 <= n <= 3:
        raise ConfigError("graph order n must be 1, 2, or 3")
    if N < n:
        raise ConfigError("truncation N must be at least n")
    text = step2_graph(c, n, N).to_json()
    if args.out:
        path = _out_path(args, "graph.json")
        with open(path, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {path}")
    else:
        print(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / dispatch


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="path to a JSON config file")
    shared.add_argument("--order", type=int, help="series truncation order override")
    shared.add_argument("--step", type=float, help="time step override (evolve)")
    shared.add_argument("--horizon", type=float, help="time horizon override (evolve)")
    shared.add_argument("--out", help="output directory (default: current)")
    shared.add_argument(
        "--parallel", type=int, default=1, help="worker count for sweep cells"
    )

    parser = argparse.ArgumentParser(
        prog="shapeflow",
        description="Shape evolution, identity checks, and integrable-flow sweeps.",
    )
    parser.add_argument(
        "--dump-identities",
        action="store_true",
        help="list every identity check with its source location and exit",
    )
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("evolve", parents=[shared], help="run a shape trajectory")
    check = sub.add_parser("check", parents=[shared], help="run an identity suite")
    check.add_argument("suite", choices=checks.SUITES)
    sub.add_parser("kp", parents=[shared], help="sweep generalized times")
    sub.add_parser("tau", parents=[shared], help="tau determinant over a time grid")
    sub.add_parser(
        "graph-dump", parents=[shared], help="dump a graph operator as JSON"
    )
    return parser


_DISPATCH = {
    "evolve": cmd_evolve,
    "check": cmd_check,
    "kp": cmd_kp,
    "tau": cmd_tau,
    "graph-dump": cmd_graph_dump,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else EXIT_OK
    if args.dump_identities:
        for record in checks.catalogue():
            print(json.dumps(record, sort_keys=True))
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        return _DISPATCH[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (StepRejected, NearSingularA, SingularSystem) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_FAILURE
