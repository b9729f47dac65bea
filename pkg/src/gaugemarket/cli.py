"""Command-line entry point: ``gaugemarket run|sweep|check``.

Exit codes: 0 success, 1 invalid scenario, 2 equilibrium solver did not
converge, 3 any other model error, 4 output could not be written.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .arbitrage import arbitrage_search
from .equilibrium import solve_equilibrium
from .errors import IoError, MarketError, NoConvergence
from .holonomy import holonomy_covariance_check, log_holonomy, plaquette_check
from .io import atomic_write_text, dumps, emit_summary
from .pareto import enumerate_pareto_allocations
from .scenario import Scenario, ScenarioError, parse_scenario
from .sim import init_simulation, run_simulation

EXIT_OK, EXIT_SCENARIO, EXIT_NO_CONVERGENCE, EXIT_MODEL, EXIT_IO = 0, 1, 2, 3, 4


def _equilibrium(s: Scenario, tol: float | None) -> dict[str, str]:
    o = s.options
    result = solve_equilibrium(s.model, p0=o["p0"], tol=o["tol"] if tol is None else tol,
                               max_iter=o["max_iter"], damping=o["damping"])
    return {"summary": dumps(result.to_summary()) + "\n"}


def _simulation(s: Scenario, tol: float | None) -> dict[str, str]:
    cfg = s.model
    initial = init_simulation(cfg).totals()
    result = run_simulation(cfg)
    state = result.state
    summary = {
        "seed": cfg.seed,
        "ticks": cfg.ticks,
        "agents": len(state.agents),
        "alive": len(state.alive()),
        "trades": len(result.ledger),
        "totals_initial": dict(zip(cfg.goods, initial)),
        "totals_final": dict(zip(cfg.goods, state.totals())),
        "dispersion_initial": result.observables[0]["dispersion"],
        "dispersion_final": result.observables[-1]["dispersion"],
    }
    return {
        "summary": dumps(summary) + "\n",
        "ledger": result.ledger.to_csv(),
        "observables": result.observables_jsonl(),
    }


def _holonomy(s: Scenario, tol: float | None) -> dict[str, str]:
    h = s.model
    lnp = log_holonomy(h)
    summary: dict[str, Any] = {"samples": len(h), "log_holonomy": lnp, "holonomy": float(np.exp(lnp))}
    if "rescale" in s.options:
        scale = s.options["rescale"]
        p, p2 = holonomy_covariance_check(h, scale)
        summary["covariance"] = {
            "holonomy_rescaled": p2,
            "ratio": p2 / p,
            "expected_ratio": scale[-1] / scale[0],
        }
    if "plaquette" in s.options:
        pq = s.options["plaquette"]
        res = plaquette_check(pq["q"], pq["p"], pq["eps"], pq["delta"], pq["axes"])
        summary["plaquette"] = {
            "log_holonomy": res.log_holonomy,
            "curvature": res.curvature,
            "defect": res.defect,
        }
    return {"summary": dumps(summary) + "\n"}


def _arbitrage(s: Scenario, tol: float | None) -> dict[str, str]:
    o = s.options
    cycles = arbitrage_search(s.model, max_len=o["max_len"], tol=o["tol"] if tol is None else tol)
    goods = s.registry.goods
    summary = {"cycles": [
        {"nodes": [{"agent": o["ids"][i], "good": goods[a]} for i, a in c.nodes], "gain": c.gain}
        for c in cycles
    ]}
    return {"summary": dumps(summary) + "\n"}


def _pareto(s: Scenario, tol: float | None) -> dict[str, str]:
    found = enumerate_pareto_allocations(s.model)
    summary = {
        "count": len(found),
        "allocation_count": s.model.allocation_count(),
        "allocations": [[list(bundle) for bundle in alloc] for alloc in found],
    }
    return {"summary": dumps(summary) + "\n"}


_DISPATCH = {
    "equilibrium": _equilibrium,
    "simulation": _simulation,
    "holonomy": _holonomy,
    "arbitrage": _arbitrage,
    "pareto": _pareto,
}


def error_payload(exc: BaseException, stage: str) -> dict[str, Any]:
    if isinstance(exc, ScenarioError):
        return exc.to_json()
    out: dict[str, Any] = {"error": type(exc).__name__, "stage": stage}
    if isinstance(exc, NoConvergence):
        out["iterations"] = exc.iterations
        out["trace"] = exc.trace
    for attr in ("field", "good"):
        if hasattr(exc, attr):
            out[attr] = getattr(exc, attr)
    out["message"] = str(exc)
    return out


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ScenarioError):
        return EXIT_SCENARIO
    if isinstance(exc, NoConvergence):
        return EXIT_NO_CONVERGENCE
    if isinstance(exc, (IoError, OSError)):
        return EXIT_IO
    return EXIT_MODEL


def _report(exc: BaseException, stage: str, out_dir: Path | None) -> int:
    payload = dumps(error_payload(exc, stage), indent=None) + "\n"
    sys.stderr.write(payload)
    if out_dir is not None:
        try:
            atomic_write_text(out_dir / "error.json", payload)
        except OSError:
            pass
    return exit_code(exc)


def cmd_run(s: Scenario, out_dir: Path, tol: float | None = None) -> int:
    """Run a parsed scenario and write its outputs under ``out_dir``."""
    try:
        texts = _DISPATCH[s.kind](s, tol)
    except MarketError as exc:
        # a failed run must not leave a previous run's outputs looking current
        for name in s.outputs.values():
            (out_dir / name).unlink(missing_ok=True)
        return _report(exc, s.kind, out_dir)
    try:
        for key, text in texts.items():
            atomic_write_text(out_dir / s.outputs[key], text)
        stale = out_dir / "error.json"
        if stale.exists():
            stale.unlink()
    except OSError as exc:
        return _report(IoError(str(exc)), "write", None)
    return EXIT_OK


def run_file(path: str | Path, out_dir: str | Path, seed: int | None = None,
             tol: float | None = None) -> int:
    out_dir = Path(out_dir)
    try:
        s = parse_scenario(path, seed=seed)
    except ScenarioError as exc:
        return _report(exc, "parse", out_dir)
    return cmd_run(s, out_dir, tol)


def _sweep_worker(args: tuple[str, str, int | None, float | None]) -> tuple[str, int]:
    path, out_dir, seed, tol = args
    return path, run_file(path, out_dir, seed, tol)


def cmd_sweep(directory: Path, out_root: Path, seed: int | None, tol: float | None,
              jobs: int | None = None) -> int:
    files = sorted(directory.glob("*.json"))
    if not files:
        return _report(ScenarioError(f"no *.json scenarios in {directory}"), "sweep", None)
    tasks = [(str(f), str(out_root / f.stem), seed, tol) for f in files]
    workers = min(len(tasks), jobs or os.cpu_count() or 1)
    worst = EXIT_OK
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for path, code in pool.map(_sweep_worker, tasks):
            print(f"{'ok' if code == 0 else 'FAIL(' + str(code) + ')'} {path}")
            worst = max(worst, code)
    return worst


def cmd_check(path: Path, seed: int | None) -> int:
    try:
        s = parse_scenario(path, seed=seed)
    except ScenarioError as exc:
        return _report(exc, "parse", None)
    print(dumps({"ok": True, "kind": s.kind, "goods": list(s.registry.goods),
                 "seed": s.seed, "outputs": s.outputs}, indent=None))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--tol", type=float, default=None,
                        help="override the solver tolerance (equilibrium, arbitrage)")
    common.add_argument("--out-dir", type=Path, default=None,
                        help="output directory (default: out/<scenario name>, or out/ for sweep)")

    parser = argparse.ArgumentParser(prog="gaugemarket", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run one scenario")
    p.add_argument("scenario", type=Path)
    p = sub.add_parser("sweep", parents=[common], help="run every scenario in a directory")
    p.add_argument("directory", type=Path)
    p.add_argument("--jobs", type=int, default=None, help="worker processes")
    p = sub.add_parser("check", parents=[common], help="validate a scenario without running it")
    p.add_argument("scenario", type=Path)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        out = args.out_dir or Path("out") / args.scenario.stem
        return run_file(args.scenario, out, args.seed, args.tol)
    if args.command == "sweep":
        return cmd_sweep(args.directory, args.out_dir or Path("out"), args.seed, args.tol, args.jobs)
    return cmd_check(args.scenario, args.seed)


if __name__ == "__main__":
    sys.exit(main())
