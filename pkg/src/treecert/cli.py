"""Command line front end: ``treecert {analyze,verify,perturb,gen}``.

Exit status is 0 on success, 1 on data/model errors and 2 on usage errors.
Set ``TREECERT_LOG`` (DEBUG, INFO, WARNING, ...) for log verbosity.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .data import DataError, Dataset, format_libsvm, load_libsvm, normalize, stratified_split
from .ensemble_analysis import AnalysisConfig, analyze_ensemble
from .formats import (
    FormatError,
    atomic_write,
    dump_json,
    load_attacks,
    load_model,
    load_threat,
    save_attacks,
    save_model,
    threat_to_json,
)
from .generate import GenSpec, random_ensemble
from .metrics import (
    MeasureReport,
    StableRegion,
    measure,
    neighborhood_experiment,
    reports_to_csv,
)
from .model import Ensemble, ThreatModel
from .oracle import DEFAULT_CAP, OracleInfeasible

log = logging.getLogger("treecert")


class UsageError(Exception):
    pass


def _configure_logging() -> None:
    level = os.environ.get("TREECERT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _threat_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("threat model")
    g.add_argument("--threat-json", type=Path, help="threat model file (overrides --delta/--budget)")
    g.add_argument("--delta", type=float, help="perturbation [-delta, +delta] on every feature, cost 1")
    g.add_argument("--budget", type=int, help="attacker budget (default: number of features)")


def _analysis_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("analysis")
    g.add_argument("--iterations", type=int, default=1000, help="maximum refinement iterations")
    g.add_argument("--split-fraction", type=float, default=0.05)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)


def _data_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("data")
    g.add_argument("--data", type=Path, required=True, help="LIBSVM test set")
    g.add_argument("--normalize", action="store_true", help="min-max scale features to [0, 1]")
    g.add_argument("--split", type=float, metavar="RATIO",
                   help="use the test part of a stratified split with this train ratio")
    g.add_argument("--region", type=Path, help="reuse an `analyze` result instead of re-running it")
    g.add_argument("--clip-domain", type=float, nargs=2, metavar=("LO", "HI"),
                   help="clip neighbourhoods to [LO, HI] on every feature")
    g.add_argument("--oracle-cap", type=int, default=DEFAULT_CAP,
                   help="maximum enumeration size for exact robustness")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treecert", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="compute the symbolic attacks of a model")
    a.add_argument("--model", type=Path, required=True)
    a.add_argument("--out", type=Path, required=True, help="output directory")
    _threat_args(a)
    _analysis_args(a)

    v = sub.add_parser("verify", help="robustness measures on a test set")
    v.add_argument("--model", type=Path, required=True)
    v.add_argument("--out", type=Path, required=True)
    v.add_argument("--epsilon", type=float, action="append", help="neighbourhood radius (repeatable)")
    v.add_argument("--no-exact", action="store_true", help="skip the exact robustness oracle")
    _data_args(v)
    _threat_args(v)
    _analysis_args(v)

    q = sub.add_parser("perturb", help="synthetic-neighbourhood experiment")
    q.add_argument("--model", type=Path, required=True)
    q.add_argument("--out", type=Path, required=True)
    q.add_argument("--epsilon", type=float, action="append")
    q.add_argument("--sets", type=int, default=100, help="number of synthetic test sets")
    _data_args(q)
    _threat_args(q)
    _analysis_args(q)

    g = sub.add_parser("gen", help="generate a random ensemble")
    g.add_argument("--out", type=Path, required=True, help="model JSON path")
    g.add_argument("--trees", type=int, default=7)
    g.add_argument("--depth", type=int, default=3)
    g.add_argument("--features", type=int, default=2)
    g.add_argument("--low", type=float, default=0.0)
    g.add_argument("--high", type=float, default=1.0)
    g.add_argument("--labels", default="-1,1", help="comma separated integer labels")
    g.add_argument("--grid", type=float, help="snap thresholds to multiples of this step")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--instances", type=int, default=0,
                   help="also write a LIBSVM dataset of this size, labelled by the model")
    g.add_argument("--label-noise", type=float, default=0.1,
                   help="fraction of generated labels flipped to another label")
    g.add_argument("--data-out", type=Path)
    return p


def _threat(args, d: int) -> ThreatModel:
    if args.threat_json is not None:
        threat = load_threat(args.threat_json)
        if threat.dimension != d:
            raise DataError(f"threat model covers {threat.dimension} features, model has {d}")
        return threat
    if args.delta is None:
        raise UsageError("either --threat-json or --delta is required")
    if args.delta < 0:
        raise UsageError("--delta must be >= 0")
    budget = d if args.budget is None else args.budget
    if budget < 0:
        raise UsageError("--budget must be >= 0")
    return ThreatModel.uniform(d, args.delta, budget)


def _config(args) -> AnalysisConfig:
    if args.iterations < 0:
        raise UsageError("--iterations must be >= 0")
    if not 0 < args.split_fraction <= 1:
        raise UsageError("--split-fraction must lie in (0, 1]")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    return AnalysisConfig(args.iterations, args.split_fraction, args.workers, args.seed)


def _echo(args, argv: Sequence[str], **extra) -> dict:
    doc = {"version": __version__, "argv": list(argv),
           "args": {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()}}
    doc.update(extra)
    return doc


def _check_inputs(*paths) -> None:
    for p in paths:
        if p is not None and not p.is_file():
            raise DataError(f"no such file: {p}")


def _region(args, T: Ensemble, threat: ThreatModel) -> tuple[StableRegion, dict]:
    if args.region is not None:
        d, attacks = load_attacks(args.region)
        if d != threat.dimension:
            raise DataError(f"region has dimension {d}, threat model {threat.dimension}")
        return StableRegion.from_attacks(attacks, d), {"region_file": str(args.region)}
    res = analyze_ensemble(T, threat, _config(args))
    return StableRegion.from_attacks(res.attacks, threat.dimension), res.telemetry


def _dataset(args, T: Ensemble) -> Dataset:
    D = load_libsvm(args.data).with_dimension(T.n_features)
    if args.normalize:
        D, _ = normalize(D)
    if args.split is not None:
        _, D = stratified_split(D, args.split, args.seed)
    return D


def cmd_analyze(args, argv) -> int:
    _check_inputs(args.model, args.threat_json)
    T = load_model(args.model)
    threat = _threat(args, T.n_features)
    res = analyze_ensemble(T, threat, _config(args))
    save_attacks(args.out / "region.json", res.attacks, threat.dimension,
                 converged=res.converged, candidates=len(res.candidates), ended=len(res.ended))
    dump_json(args.out / "telemetry.json", res.telemetry)
    dump_json(args.out / "config.json", _echo(args, argv, threat=threat_to_json(threat)))
    print(f"{len(res.attacks)} symbolic attacks ({'converged' if res.converged else 'stopped'} "
          f"after {res.telemetry['iterations']} iterations) -> {args.out / 'region.json'}")
    return 0


def _epsilons(args) -> list[float]:
    eps = args.epsilon if args.epsilon else [0.0]
    if any(not e >= 0 for e in eps):
        raise UsageError("--epsilon must be >= 0")
    return eps


def cmd_verify(args, argv) -> int:
    _check_inputs(args.model, args.data, args.threat_json, args.region)
    T = load_model(args.model)
    threat = _threat(args, T.n_features)
    eps_list = _epsilons(args)
    D = _dataset(args, T)
    t0 = time.perf_counter()
    region, telemetry = _region(args, T, threat)
    t_analysis = time.perf_counter() - t0
    exact = not args.no_exact
    reports = []
    for eps in eps_list:
        common = dict(dataset=args.data.name, model=args.model.name,
                      clip_domain=tuple(args.clip_domain) if args.clip_domain else None,
                      cap=args.oracle_cap, analysis_seconds=t_analysis)
        try:
            rep = measure(T, D, region, threat, eps, exact=exact, **common)
        except OracleInfeasible as e:
            log.warning("exact robustness skipped: %s", e)
            exact = False
            rep = measure(T, D, region, threat, eps, exact=False, **common)
        rep.config = {"seed": args.seed, "region_size": len(region)}
        reports.append(rep)
    _write_reports(args.out, reports)
    dump_json(args.out / "config.json", _echo(args, argv, threat=threat_to_json(threat),
                                                analysis=telemetry))
    print(reports_to_csv(reports), end="")
    return 0


def cmd_perturb(args, argv) -> int:
    _check_inputs(args.model, args.data, args.threat_json, args.region)
    if args.sets < 1:
        raise UsageError("--sets must be >= 1")
    T = load_model(args.model)
    threat = _threat(args, T.n_features)
    eps_list = _epsilons(args)
    D = _dataset(args, T)
    t0 = time.perf_counter()
    region, telemetry = _region(args, T, threat)
    t_analysis = time.perf_counter() - t0
    reports = []
    for eps in eps_list:
        rep = measure(T, D, region, threat, eps, dataset=args.data.name, model=args.model.name,
                      clip_domain=tuple(args.clip_domain) if args.clip_domain else None,
                      cap=args.oracle_cap, analysis_seconds=t_analysis)
        t1 = time.perf_counter()
        nb = neighborhood_experiment(T, D, eps, threat, args.sets, args.seed, args.oracle_cap)
        rep.r_bar, rep.r_min, rep.r_max = nb.r_bar, nb.r_min, nb.r_max
        rep.a_min, rep.a_max = nb.a_min, nb.a_max
        rep.oracle_seconds = (rep.oracle_seconds or 0.0) + time.perf_counter() - t1
        rep.config = {"seed": args.seed, "sets": args.sets, "region_size": len(region),
                      "set_robustness": nb.set_robustness, "set_accuracy": nb.set_accuracy}
        rep.check()
        reports.append(rep)
        atomic_write(args.out / f"worst_eps{eps:g}.libsvm", format_libsvm(nb.worst))
    _write_reports(args.out, reports)
    dump_json(args.out / "config.json", _echo(args, argv, threat=threat_to_json(threat),
                                                analysis=telemetry))
    print(reports_to_csv(reports), end="")
    return 0


def _write_reports(out: Path, reports: list[MeasureReport]) -> None:
    atomic_write(out / "report.csv", reports_to_csv(reports))
    atomic_write(out / "report.json", "[\n" + ",\n".join(r.to_json() for r in reports) + "\n]\n")


def cmd_gen(args, argv) -> int:
    try:
        labels = tuple(int(s) for s in args.labels.split(","))
    except ValueError:
        raise UsageError(f"--labels must be comma separated integers, got {args.labels!r}") from None
    try:
        spec = GenSpec(args.trees, args.depth, args.features, args.low, args.high, labels,
                       args.seed, args.grid)
    except ValueError as e:
        raise UsageError(str(e)) from None
    T = random_ensemble(spec)
    save_model(args.out, T)
    if args.instances:
        if args.data_out is None:
            raise UsageError("--instances needs --data-out")
        rng = np.random.default_rng(np.random.SeedSequence(args.seed).spawn(2)[1])
        X = rng.uniform(args.low, args.high, size=(args.instances, args.features))
        y = T.predict_many(X)
        flip = rng.random(args.instances) < args.label_noise
        others = [[l for l in T.labels if l != v] for v in y]
        for i in np.nonzero(flip)[0]:
            if others[i]:
                y[i] = others[i][int(rng.integers(len(others[i])))]
        atomic_write(args.data_out, format_libsvm(Dataset(X, y)))
    dump_json(Path(str(args.out) + ".config.json"), _echo(args, argv, spec=asdict(spec)))
    print(f"wrote {args.out}")
    return 0


COMMANDS = {"analyze": cmd_analyze, "verify": cmd_verify, "perturb": cmd_perturb, "gen": cmd_gen}


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        return COMMANDS[args.command](args, argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"treecert: error: {e}", file=sys.stderr)
        return 2
    except (DataError, FormatError, OracleInfeasible, OSError, ValueError) as e:
        print(f"treecert: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
