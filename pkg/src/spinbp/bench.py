"""Benchmark harness and CLI.

Sweeps the three engines (exact diagonalization, Suzuki-Trotter contraction,
operator belief propagation) over an inverse-temperature grid, compares each
reduced state against the exact-diagonalization reference with fidelity and
trace distance, and writes one CSV row per (beta, method, slices) point.
Also tabulates the closed-form operation counts of both approximate engines
against measured wall times.

The library API is 0-based; the CLI and config files use 1-based site
labels (``--keep 1,2`` keeps the first two sites).
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import linalg, metrics, qbp, spinchain, trotter

CSV_HEADER = "beta,method,n_slices,fidelity,trace_distance,iterations,wall_time_ms,opcount,status"
KNOWN_METHODS = ("exact", "st", "qbp")


@dataclass
class SweepConfig:
    """One sweep: a model family, a beta grid, engines to run, output options.

    ``keep`` uses 0-based site indices.  ``time_repeats`` is the number of
    timed repetitions per row (median reported); 0 disables timing and
    writes 0.0, which makes the CSV bytes reproducible across runs.
    ``seed`` only labels randomized test fixtures; the engines themselves
    are deterministic.
    """

    sites: int = 3
    beta_min: float = 0.2
    beta_max: float = 2.0
    beta_steps: int = 10
    methods: tuple = KNOWN_METHODS
    st_slices: tuple = (20, 100)
    qbp_tol: float = 1e-10
    qbp_max_iters: int = 500
    qbp_damping: float = 0.5
    keep: tuple = (0, 1)
    out: str | None = None
    seed: int = 0
    time_repeats: int = 5
    couplings: tuple | None = None

    def validate(self) -> None:
        if self.sites < 2:
            raise ValueError(f"sites must be >= 2, got {self.sites}")
        if self.beta_steps < 1:
            raise ValueError(f"beta-steps must be >= 1, got {self.beta_steps}")
        if self.beta_min < 0:
            raise ValueError(f"beta-min must be >= 0, got {self.beta_min}")
        if self.beta_steps > 1 and self.beta_max <= self.beta_min:
            raise ValueError("beta-max must exceed beta-min for a multi-point grid")
        bad = [m for m in self.methods if m not in KNOWN_METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; choose from {list(KNOWN_METHODS)}")
        if not self.methods:
            raise ValueError("at least one method is required")
        if any(n < 1 for n in self.st_slices):
            raise ValueError(f"st-slices must all be >= 1, got {self.st_slices}")
        if "st" in self.methods and not self.st_slices:
            raise ValueError("method 'st' requires at least one slice count")
        keep = sorted(set(self.keep))
        if not keep or keep[0] < 0 or keep[-1] >= self.sites:
            raise ValueError(f"keep sites {self.keep} out of range for {self.sites} sites")
        if self.time_repeats < 0:
            raise ValueError(f"time-repeats must be >= 0, got {self.time_repeats}")

    def beta_grid(self) -> list[float]:
        if self.beta_steps == 1:
            return [float(self.beta_min)]
        return [float(b) for b in np.linspace(self.beta_min, self.beta_max, self.beta_steps)]


@dataclass
class SweepRecord:
    """One CSV row; metric fields are None when the engine failed."""

    beta: float
    method: str
    n_slices: int | None
    fidelity: float | None
    trace_distance: float | None
    iterations: int
    wall_time_ms: float
    opcount: int
    status: str = "ok"


def _qbp_state(result: qbp.QbpResult, keep: tuple) -> np.ndarray:
    keep = tuple(sorted(set(keep)))
    if len(keep) == 1:
        return result.beliefs_single[keep[0]]
    if len(keep) == 2 and keep[1] == keep[0] + 1:
        return result.beliefs_pair[keep]
    raise ValueError(
        f"qbp produces single-site and adjacent-pair beliefs only, cannot keep {keep}"
    )


def _timed(fn, repeats: int):
    """Run ``fn``; with repeats > 0 rerun it and report the median time in ms."""
    value = fn()
    if repeats <= 0:
        return value, 0.0
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        value = fn()
        times.append((time.perf_counter() - start) * 1e3)
    return value, float(statistics.median(times))


def run_sweep(config: SweepConfig) -> list[SweepRecord]:
    """Produce one record per (beta, method[, slices]), sorted for stable CSV."""
    config.validate()
    keep = tuple(sorted(set(config.keep)))
    records = []
    for beta in config.beta_grid():
        model = spinchain.heisenberg_chain(config.sites, beta, config.couplings)
        reference = linalg.partial_trace(
            spinchain.exact_gibbs(model), [2] * config.sites, keep
        )
        for method in config.methods:
            if method == "st":
                for n in config.st_slices:
                    records.append(_run_row(config, model, reference, keep, method, n))
            else:
                records.append(_run_row(config, model, reference, keep, method, None))
    records.sort(key=lambda r: (r.beta, r.method, r.n_slices or 0))
    return records


def _run_row(config, model, reference, keep, method, n_slices) -> SweepRecord:
    sites = config.sites
    iterations = 0
    opcount = 0
    try:
        if method == "exact":
            def compute():
                return linalg.partial_trace(spinchain.exact_gibbs(model), [2] * sites, keep), 0
        elif method == "st":
            if n_slices >= 3:
                opcount = trotter.st_opcount(n_slices, sites)

            def compute():
                return trotter.st_reduced(trotter.trotter_plan(model, n_slices), keep), n_slices
        elif method == "qbp":
            opcount = qbp.qbp_opcount(sites)

            def compute():
                result = qbp.qbp_run(
                    model,
                    max_iters=config.qbp_max_iters,
                    tol=config.qbp_tol,
                    damping=config.qbp_damping,
                )
                return _qbp_state(result, keep), result
        else:  # pragma: no cover - validate() rejects this
            raise ValueError(f"unknown method {method!r}")

        (state, extra), wall_ms = _timed(compute, config.time_repeats)
        status = "ok"
        if method == "qbp":
            iterations = extra.iterations
            if not extra.converged:
                status = f"not-converged(residual={extra.residual:.3e})"
        else:
            iterations = extra
        fid = metrics.fidelity(state, reference)
        dist = metrics.trace_distance(state, reference)
        return SweepRecord(
            model.beta, method, n_slices, fid, dist, iterations, wall_ms, opcount, status
        )
    except Exception as exc:
        status = f"error: {exc}".replace(",", ";").replace("\n", " ")
        return SweepRecord(
            model.beta, method, n_slices, None, None, iterations, 0.0, opcount, status
        )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def format_csv(records: list[SweepRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                [
                    _fmt(r.beta),
                    r.method,
                    _fmt(r.n_slices),
                    _fmt(r.fidelity),
                    _fmt(r.trace_distance),
                    _fmt(r.iterations),
                    _fmt(r.wall_time_ms),
                    _fmt(r.opcount),
                    r.status,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def emit_csv(records: list[SweepRecord], path) -> None:
    """Write the sweep CSV (UTF-8, LF); refuses to create a file for no rows."""
    if not records:
        raise ValueError("no records to write")
    text = format_csv(records)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


@dataclass
class ComplexityRow:
    """Operation counts and wall times for one (sites, slices) grid point."""

    sites: int
    slices: int
    qbp_ops_per_sweep: int
    qbp_ops_total: int
    st_ops: int
    qbp_wall_ms: float
    st_wall_ms: float


def compare_complexity(
    sites_list, slices_list, beta: float = 1.0, time_repeats: int = 3
) -> list[ComplexityRow]:
    """Closed-form operation counts next to measured wall times.

    The belief-propagation total budgets one sweep per site (the tree-depth
    heuristic that makes the overall cost quadratic in the chain length).
    """
    rows = []
    for sites in sites_list:
        model = spinchain.heisenberg_chain(int(sites), float(beta))
        per_sweep = qbp.qbp_opcount(sites)
        _, qbp_ms = _timed(lambda: qbp.qbp_run(model), time_repeats)
        for slices in slices_list:
            st_ops = trotter.st_opcount(slices, sites) if slices >= 3 else 0
            plan = trotter.trotter_plan(model, int(slices))
            _, st_ms = _timed(lambda: trotter.st_density(plan), time_repeats)
            rows.append(
                ComplexityRow(
                    int(sites), int(slices), per_sweep, sites * per_sweep, st_ops, qbp_ms, st_ms
                )
            )
    return rows


def format_complexity(rows: list[ComplexityRow]) -> str:
    header = f"{'sites':>5} {'slices':>6} {'qbp/sweep':>10} {'qbp total':>10} {'st ops':>10} {'qbp ms':>10} {'st ms':>10}"
    lines = [header]
    for r in rows:
        lines.append(
            f"{r.sites:>5} {r.slices:>6} {r.qbp_ops_per_sweep:>10} {r.qbp_ops_total:>10} "
            f"{r.st_ops:>10} {r.qbp_wall_ms:>10.3f} {r.st_wall_ms:>10.3f}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CLI


def _parse_int_list(text: str, flag: str) -> tuple:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"{flag}: expected comma-separated integers, got {text!r}") from None


def _parse_int_range(text: str, flag: str) -> tuple:
    """Accept 'a-b' (inclusive) or a comma-separated list."""
    text = text.strip()
    if "-" in text and "," not in text:
        lo, _, hi = text.partition("-")
        try:
            lo_i, hi_i = int(lo), int(hi)
        except ValueError:
            raise ValueError(f"{flag}: expected a range like 2-6, got {text!r}") from None
        if hi_i < lo_i:
            raise ValueError(f"{flag}: empty range {text!r}")
        return tuple(range(lo_i, hi_i + 1))
    return _parse_int_list(text, flag)


def _parse_keep(text: str) -> tuple:
    labels = _parse_int_list(text, "--keep")
    if any(l < 1 for l in labels):
        raise ValueError(f"--keep: site labels are 1-based, got {text!r}")
    return tuple(l - 1 for l in labels)


_CONFIG_FLAG_KEYS = (
    "beta-min", "beta-max", "beta-steps", "methods", "st-slices", "keep",
    "qbp-tol", "qbp-max-iters", "qbp-damping", "out", "seed", "time-repeats",
)
_CONFIG_MODEL_KEYS = ("model", "sites", "beta")


def _config_from_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        keys = spinchain.parse_key_values(fh.read())
    for key in keys:
        if key in _CONFIG_FLAG_KEYS or key in _CONFIG_MODEL_KEYS or key.startswith("J_"):
            continue
        raise ValueError(f"config file: unknown key {key!r}")
    return keys


def _build_sweep_config(args) -> SweepConfig:
    file_keys = _config_from_file(args.config) if args.config else {}

    def pick(flag_value, key, convert, default):
        if flag_value is not None:
            return flag_value
        if key in file_keys:
            try:
                return convert(file_keys[key])
            except ValueError as exc:
                raise ValueError(f"config file, key {key!r}: {exc}") from None
        return default

    sites = pick(args.sites, "sites", int, 3)

    # a bare 'beta' key gives a single-point grid unless an explicit grid is set
    beta_min = pick(args.beta_min, "beta-min", float, None)
    beta_max = pick(args.beta_max, "beta-max", float, None)
    beta_steps = pick(args.beta_steps, "beta-steps", int, None)
    if beta_min is None and beta_max is None and beta_steps is None and "beta" in file_keys:
        beta_min = beta_max = float(file_keys["beta"])
        beta_steps = 1
    beta_min = 0.2 if beta_min is None else beta_min
    beta_max = 2.0 if beta_max is None else beta_max
    beta_steps = 10 if beta_steps is None else beta_steps

    couplings = None
    if any(k.startswith("J_") for k in file_keys):
        couplings = tuple(spinchain.couplings_from_keys(file_keys, sites))

    config = SweepConfig(
        sites=sites,
        beta_min=beta_min,
        beta_max=beta_max,
        beta_steps=beta_steps,
        methods=pick(
            args.methods, "methods", lambda t: tuple(t.split(",")), KNOWN_METHODS
        ),
        st_slices=pick(
            args.st_slices, "st-slices", lambda t: _parse_int_list(t, "st-slices"), (20, 100)
        ),
        qbp_tol=pick(args.qbp_tol, "qbp-tol", float, qbp.DEFAULT_TOL),
        qbp_max_iters=pick(args.qbp_max_iters, "qbp-max-iters", int, qbp.DEFAULT_MAX_ITERS),
        qbp_damping=pick(args.qbp_damping, "qbp-damping", float, qbp.DEFAULT_DAMPING),
        keep=pick(args.keep, "keep", _parse_keep, (0, 1)),
        out=pick(args.out, "out", str, None),
        seed=pick(args.seed, "seed", int, 0),
        time_repeats=pick(args.time_repeats, "time-repeats", int, 5),
        couplings=couplings,
    )
    config.validate()
    return config


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinbp",
        description="Gibbs-state engines for Heisenberg chains: sweep and compare.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a beta sweep and write CSV")
    sweep.add_argument("--sites", type=int, help="chain length (default 3)")
    sweep.add_argument("--beta-min", type=float, dest="beta_min")
    sweep.add_argument("--beta-max", type=float, dest="beta_max")
    sweep.add_argument("--beta-steps", type=int, dest="beta_steps")
    sweep.add_argument(
        "--methods", type=lambda t: tuple(tok for tok in t.split(",") if tok),
        help="comma list from exact,st,qbp",
    )
    sweep.add_argument(
        "--st-slices", dest="st_slices", type=lambda t: _parse_int_list(t, "--st-slices"),
        help="comma list of slice counts",
    )
    sweep.add_argument(
        "--keep", type=_parse_keep,
        help="1-based site labels of the reduced state (default 1,2)",
    )
    sweep.add_argument("--qbp-tol", type=float, dest="qbp_tol")
    sweep.add_argument("--qbp-max-iters", type=int, dest="qbp_max_iters")
    sweep.add_argument("--qbp-damping", type=float, dest="qbp_damping")
    sweep.add_argument("--out", help="CSV output path (default: print to stdout)")
    sweep.add_argument("--seed", type=int, help="label for randomized fixtures")
    sweep.add_argument(
        "--time-repeats", type=int, dest="time_repeats",
        help="timed repetitions per row; 0 for reproducible output (default 5)",
    )
    sweep.add_argument("--config", help="key=value file; explicit flags win")

    comp = sub.add_parser("complexity", help="tabulate operation counts vs wall time")
    comp.add_argument("--sites", default="3", help="range like 3-6 or comma list")
    comp.add_argument("--slices", default="20", help="range like 10-40 or comma list")
    comp.add_argument("--beta", type=float, default=1.0)
    comp.add_argument("--time-repeats", type=int, dest="time_repeats", default=3)
    return parser


def main(argv=None) -> int:
    parser = _make_parser()
    args = parser.parse_args(argv)

    if args.command == "sweep":
        try:
            config = _build_sweep_config(args)
        except (ValueError, OSError) as exc:
            print(f"spinbp: config error: {exc}", file=sys.stderr)
            return 2
        try:
            records = run_sweep(config)
        except ValueError as exc:
            print(f"spinbp: config error: {exc}", file=sys.stderr)
            return 2
        if config.out:
            emit_csv(records, config.out)
            print(f"wrote {len(records)} rows to {config.out}")
        else:
            sys.stdout.write(format_csv(records))
        failures = [r for r in records if r.status != "ok"]
        for r in failures:
            print(
                f"spinbp: row (beta={r.beta:g}, {r.method}"
                + (f", n={r.n_slices}" if r.n_slices else "")
                + f"): {r.status}",
                file=sys.stderr,
            )
        return 3 if failures else 0

    if args.command == "complexity":
        try:
            sites = _parse_int_range(args.sites, "--sites")
            slices = _parse_int_range(args.slices, "--slices")
            if any(s < 2 for s in sites):
                raise ValueError("--sites: chain length must be >= 2")
            if any(s < 1 for s in slices):
                raise ValueError("--slices: slice count must be >= 1")
        except ValueError as exc:
            print(f"spinbp: config error: {exc}", file=sys.stderr)
            return 2
        rows = compare_complexity(sites, slices, beta=args.beta, time_repeats=args.time_repeats)
        sys.stdout.write(format_complexity(rows))
        return 0

    return 2  # pragma: no cover - subparsers are required


if __name__ == "__main__":
    sys.exit(main())
