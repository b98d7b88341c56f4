"""Command-line entry point for bnmap."""

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO

import yaml

from .bench.generator import SuiteSpec, gen_random_instance, load_suite
from .bench.runner import parse_solver, run_suite
from .config import (
    APP_NAME,
    APP_VERSION,
    DEFAULT_APPROX_MODE,
    DEFAULT_EPSILON,
    DEFAULT_HEURISTIC,
    DEFAULT_TIMEOUT_SECONDS,
    EXIT_OK,
    EXIT_TIMEOUT,
    EXIT_USAGE,
    EXIT_VALIDATION,
    EXIT_ZERO_EVIDENCE,
    LOG_FORMAT,
    SUPPORTED_FAMILIES,
    SUPPORTED_HEURISTICS,
    get_thread_count,
    normalize_backend,
    normalize_mode,
)
from .core.network import Network, make_instantiation
from .core.numeric import format_value, to_float
from .core.reader import read_network, read_query, serialize_network, serialize_query
from .core.validators import require_valid, validate_network
from .decomposition.annotate import prepare_decomposition
from .decomposition.treedecomp import dump_decomposition, visible_map_groups
from .errors import (
    BackendMismatchError,
    BNMapError,
    GadgetInputError,
    InvalidQueryError,
    NetworkParseError,
    NetworkValidationError,
    OracleGuardError,
    SolverTimeoutError,
    ZeroProbabilityEvidenceError,
)
from .export.report import emit_report
from .export.workbook import write_workbook
from .gadgets.artifact import Certificate, write_artifact
from .gadgets.maxsat import amplify, max2sat_to_naivebayes, read_dimacs
from .gadgets.partition import partition_to_hmm, partition_to_polytree, read_partition
from .inference.belief import BeliefUpdater, cost_estimate
from .inference.fptas import solve_map_approx
from .inference.map_exact import MapSolution, solve_map
from .inference.oracle import brute_force_map
from .inference.scheduler import Deadline

logger = logging.getLogger(__name__)

GADGET_KINDS = ("partition-polytree", "partition-hmm", "max2sat")


class UsageError(Exception):
    """Bad command line; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class CliConfig:
    """Parsed and cross-checked command line."""

    command: str
    args: argparse.Namespace
    threads: int = 1
    backend: Optional[str] = None
    epsilon: float = DEFAULT_EPSILON
    mode: str = DEFAULT_APPROX_MODE
    timeout: Optional[float] = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        """
        Raises:
            UsageError: inconsistent flags
        """
        try:
            threads = get_thread_count(args.threads)
            backend = normalize_backend(args.backend) if getattr(args, "backend", None) else None
            mode = normalize_mode(getattr(args, "mode", None) or DEFAULT_APPROX_MODE)
        except ValueError as e:
            raise UsageError(str(e))
        epsilon = getattr(args, "epsilon", None)
        timeout = getattr(args, "timeout", None)
        if timeout is not None and timeout <= 0:
            raise UsageError("--timeout must be positive")

        if args.command == "solve":
            if args.solver != "approx" and (epsilon is not None or getattr(args, "mode", None)):
                raise UsageError("--epsilon/--mode only apply to --solver approx")
            if args.solver == "approx" and backend == "rational":
                raise UsageError("--solver approx runs on the f64 backend only")
            if epsilon is not None and not 0 < epsilon <= 1:
                raise UsageError(f"--epsilon must lie in (0, 1], got {epsilon}")
        if args.command == "gen" and args.gen_command == "gadget":
            if args.q is not None and args.kind != "max2sat":
                raise UsageError("--q only applies to max2sat gadgets")
            if args.q is not None and args.q < 1:
                raise UsageError("--q must be >= 1")
        return cls(
            command=args.command,
            args=args,
            threads=threads,
            backend=backend,
            epsilon=epsilon if epsilon is not None else DEFAULT_EPSILON,
            mode=mode,
            timeout=timeout,
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=APP_NAME, description="Exact and approximate MAP for Bayesian networks")
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    parser.add_argument("--log-level", default="WARNING", help="stderr logging level")
    parser.add_argument(
        "--threads", type=int, default=None, help="worker threads (default: $BNMAP_THREADS or 1)"
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", help="answer a MAP query")
    solve.add_argument("--net", required=True)
    solve.add_argument("--query", required=True)
    solve.add_argument("--solver", choices=["exact", "approx", "oracle"], default="exact")
    solve.add_argument("--epsilon", type=float, default=None)
    solve.add_argument("--mode", default=None, help="mult or add")
    solve.add_argument("--backend", default=None, help="f64 or rational (default: from file)")
    solve.add_argument("--timeout", type=float, default=None, help="seconds")
    solve.add_argument("--heuristic", choices=SUPPORTED_HEURISTICS, default=DEFAULT_HEURISTIC)
    solve.add_argument("--no-pruning", action="store_true", help="keep dominated candidates")

    gen = sub.add_parser("gen", help="generate instances")
    gen_sub = gen.add_subparsers(dest="gen_command", required=True, parser_class=_Parser)
    rnd = gen_sub.add_parser("random", help="random network family")
    rnd.add_argument("--family", required=True, help=f"one of {', '.join(SUPPORTED_FAMILIES)}")
    rnd.add_argument("--size", type=int, default=10, help="base network size")
    rnd.add_argument("--max-card", type=int, default=2)
    rnd.add_argument("--bucket", default="0-10", help="search-space bucket")
    rnd.add_argument("--seed", type=int, default=0)
    rnd.add_argument("--count", type=int, default=1)
    rnd.add_argument("--out", required=True)
    gad = gen_sub.add_parser("gadget", help="certified hard instance")
    gad.add_argument("kind", choices=GADGET_KINDS)
    gad.add_argument("--in", dest="input", required=True)
    gad.add_argument("--out", required=True)
    gad.add_argument("--q", type=int, default=None, help="amplification copies (max2sat)")
    gad.add_argument("--name", default=None)

    bench = sub.add_parser("bench", help="run a benchmark suite")
    bench.add_argument("--suite", default=None, help="YAML suite (default: bundled suite)")
    bench.add_argument("--out", required=True, help="CSV output")
    bench.add_argument("--markdown", default=None)
    bench.add_argument("--xlsx", default=None)
    bench.add_argument("--solvers", nargs="+", default=None)
    bench.add_argument("--timeout", type=float, default=None)
    bench.add_argument("--heuristic", choices=SUPPORTED_HEURISTICS, default=DEFAULT_HEURISTIC)

    check = sub.add_parser("check", help="validate a network")
    check.add_argument("--net", required=True)

    dec = sub.add_parser("decompose", help="show the binary tree decomposition")
    dec.add_argument("--net", required=True)
    dec.add_argument("--query", default=None)
    dec.add_argument("--heuristic", choices=SUPPORTED_HEURISTICS, default=DEFAULT_HEURISTIC)

    bu = sub.add_parser("bu", help="p(x | e) by belief updating")
    bu.add_argument("--net", required=True)
    bu.add_argument("--target", nargs="+", required=True, metavar="NAME=STATE")
    bu.add_argument("--evidence", nargs="*", default=[], metavar="NAME=STATE")
    bu.add_argument("--backend", default=None)
    return parser


def _emit(out: TextIO, key: str, value: Any) -> None:
    if value is not None:
        out.write(f"{key}={value}\n")


def _pairs(items: Sequence[str]) -> Dict[str, int]:
    pairs: Dict[str, int] = {}
    for item in items:
        name, sep, state = item.partition("=")
        if not sep:
            raise UsageError(f"expected NAME=STATE, got {item!r}")
        try:
            pairs[name] = int(state)
        except ValueError:
            raise UsageError(f"bad state index in {item!r}")
    return pairs


def _load(path: str, backend: Optional[str]) -> Network:
    return require_valid(read_network(path, backend))


def cmd_solve(cfg: CliConfig, out: TextIO) -> int:
    args = cfg.args
    net = _load(args.net, cfg.backend)
    query = read_query(args.query, net)
    deadline = Deadline(cfg.timeout)
    if args.solver == "oracle":
        solution: MapSolution = brute_force_map(net, query, deadline)
        decomp = None
    else:
        decomp = prepare_decomposition(net, query, args.heuristic)
        if args.solver == "approx":
            solution = solve_map_approx(
                net, query, decomp, cfg.epsilon, cfg.mode, cfg.threads, deadline
            )
        else:
            solution = solve_map(
                net, query, decomp, pruning=not args.no_pruning, threads=cfg.threads,
                deadline=deadline,
            )

    _emit(out, "solver", args.solver)
    _emit(out, "backend", net.backend.value)
    _emit(out, "value", format_value(solution.value))
    _emit(out, "value_float", repr(to_float(solution.value)))
    named = solution.named_assignment(net)
    _emit(out, "assignment", " ".join(f"{k}={v}" for k, v in named.items()))
    for key in ("avg_pareto", "avg_dim", "max_pareto", "width", "clusters"):
        _emit(out, key, solution.stats.get(key))
    if solution.guarantee:
        for key in ("mode", "epsilon", "lower_bound_claimed", "upper_bound_on_optimum"):
            _emit(out, key, solution.guarantee[key])
    if query.threshold is not None:
        _emit(out, "threshold", format_value(query.threshold))
        _emit(out, "above_threshold", str(solution.value > query.threshold).lower())
    if query.certificate:
        certificate = Certificate.from_text(query.certificate)
        _emit(out, "certificate_ok", str(certificate.check(solution.value, query.threshold)).lower())
    return EXIT_OK


def _safe_name(name: str) -> str:
    return name.replace(">", "gt")


def cmd_gen(cfg: CliConfig, out: TextIO) -> int:
    args = cfg.args
    out_dir = Path(args.out)
    if args.gen_command == "random":
        try:
            spec = SuiteSpec(
                family=args.family,
                base_size=args.size,
                max_card=args.max_card,
                seed=args.seed,
                query_count=args.count,
                ss_bucket=args.bucket,
            )
        except ValueError as e:
            raise UsageError(str(e))
        out_dir.mkdir(parents=True, exist_ok=True)
        for index in range(spec.query_count):
            net, query = gen_random_instance(spec, index)
            stem = out_dir / f"{_safe_name(spec.name)}.{index:03d}"
            Path(f"{stem}.bnm").write_text(serialize_network(net), encoding="utf-8")
            Path(f"{stem}.qry").write_text(serialize_query(query, net), encoding="utf-8")
            _emit(out, "instance", f"{stem}.bnm")
        return EXIT_OK

    if args.kind == "max2sat":
        artifact = max2sat_to_naivebayes(read_dimacs(args.input), name=args.name)
        if args.q is not None:
            artifact = amplify(artifact, args.q, name=args.name)
    elif args.kind == "partition-polytree":
        artifact = partition_to_polytree(read_partition(args.input), name=args.name)
    else:
        artifact = partition_to_hmm(read_partition(args.input), name=args.name)
    net_path, query_path = write_artifact(artifact, out_dir)
    _emit(out, "network", net_path)
    _emit(out, "query", query_path)
    if artifact.threshold is not None:
        _emit(out, "threshold", format_value(artifact.threshold))
    _emit(out, "certificate", artifact.certificate.to_text())
    return EXIT_OK


def cmd_bench(cfg: CliConfig, out: TextIO) -> int:
    args = cfg.args
    try:
        specs, settings = load_suite(args.suite)
    except (ValueError, TypeError, yaml.YAMLError) as e:
        raise UsageError(f"bad suite file: {e}")
    solvers: List[str] = args.solvers or settings.get("solvers") or ["exact"]
    try:
        solver_specs = [parse_solver(s) for s in solvers]
    except ValueError as e:
        raise UsageError(str(e))
    timeout = cfg.timeout if cfg.timeout is not None else settings.get("timeout", DEFAULT_TIMEOUT_SECONDS)
    records = run_suite(specs, solver_specs, timeout, cfg.threads, args.heuristic)
    csv_text, markdown = emit_report(records)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(csv_text, encoding="utf-8")
    if args.markdown:
        Path(args.markdown).write_text(markdown, encoding="utf-8")
    else:
        out.write(markdown)
    if args.xlsx:
        write_workbook(
            records,
            args.xlsx,
            {"suite": args.suite or "default", "solvers": ", ".join(solvers),
             "timeout": timeout, "threads": cfg.threads},
        )
    _emit(out, "records", len(records))
    return EXIT_OK


def cmd_check(cfg: CliConfig, out: TextIO) -> int:
    report = validate_network(read_network(cfg.args.net))
    _emit(out, "valid", str(report["is_valid"]).lower())
    for key, value in report["summary"].items():
        _emit(out, key, value)
    for message in report["errors"]:
        _emit(out, "error", message)
    for message in report["warnings"]:
        _emit(out, "warning", message)
    return EXIT_OK if report["is_valid"] else EXIT_VALIDATION


def cmd_decompose(cfg: CliConfig, out: TextIO) -> int:
    args = cfg.args
    net = _load(args.net, None)
    query = read_query(args.query, net) if args.query else None
    decomp = prepare_decomposition(net, query, args.heuristic)
    _emit(out, "width", decomp.width)
    _emit(out, "clusters", decomp.size)
    _emit(out, "cost_estimate", cost_estimate(decomp))
    if query is not None:
        groups = visible_map_groups(net, query)
        _emit(out, "visible_map", max((len(g) for g in groups), default=0))
    out.write(dump_decomposition(decomp.base, net.names) + "\n")
    return EXIT_OK


def cmd_bu(cfg: CliConfig, out: TextIO) -> int:
    args = cfg.args
    net = _load(args.net, cfg.backend)
    target = make_instantiation(net, _pairs(args.target))
    evidence = make_instantiation(net, _pairs(args.evidence))
    decomp = prepare_decomposition(net, None)
    updater = BeliefUpdater(net, decomp, threads=cfg.threads)
    value = updater.conditional(target, evidence)
    _emit(out, "value", format_value(value))
    _emit(out, "value_float", repr(to_float(value)))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "gen": cmd_gen,
    "bench": cmd_bench,
    "check": cmd_check,
    "decompose": cmd_decompose,
    "bu": cmd_bu,
}


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    """
    Run one command.

    Returns:
        0 ok, 1 usage or parse error, 2 validation error, 3 timeout,
        4 zero-probability evidence
    """
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_USAGE
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
    try:
        cfg = CliConfig.from_args(args)
        return COMMANDS[cfg.command](cfg, out)
    except (UsageError, NetworkParseError, BackendMismatchError, OracleGuardError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except (NetworkValidationError, InvalidQueryError, GadgetInputError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_VALIDATION
    except SolverTimeoutError as e:
        sys.stderr.write(f"timeout: {e}\n")
        return EXIT_TIMEOUT
    except ZeroProbabilityEvidenceError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ZERO_EVIDENCE
    except (BNMapError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
