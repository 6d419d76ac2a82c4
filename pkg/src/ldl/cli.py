"""Command line entry point: ``ldl check|eval|props|train|compile``.

Exit codes: 0 success, 1 parse error, 2 type error, 3 I/O error (missing or
unreadable file), 4 evaluation error (including malformed or mismatched
network, context and data files), 5 bad command line usage.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import logics as Lg
from . import netio
from . import properties as P
from .evaluator import EvalError, SamplingConfig, SemanticContext, apply_root
from .graph import GraphError, _Runner, compile_spec
from .lowering import NegationNotPushable
from .parser import ParseError, parse
from .typechecker import LdlTypeError, check_spec

EXIT_PARSE, EXIT_TYPE, EXIT_IO, EXIT_EVAL, EXIT_USAGE = 1, 2, 3, 4, 5


class _Fail(Exception):
    def __init__(self, code: int, kind: str, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.code = code
        self.kind = kind
        self.line = line
        self.col = col


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _Fail(EXIT_IO, "IOError", f"{path}: {exc.strerror or exc}")


def load_spec(path: str):
    """Parse and typecheck; returns ``(spec, root type)``."""
    text = _read(path)
    try:
        spec = parse(text)
    except ParseError as exc:
        raise _Fail(EXIT_PARSE, type(exc).__name__, f"{path}:{exc}", exc.line, exc.col)
    try:
        t = check_spec(spec)
    except LdlTypeError as exc:
        line, col = exc.loc if exc.loc else (0, 0)
        raise _Fail(EXIT_TYPE, type(exc).__name__, f"{path}:{exc}", line, col)
    return spec, t


def _logic(args) -> Lg.Logic:
    try:
        return Lg.logic(
            args.logic,
            yager_p=args.yager_p,
            stl_nu=args.stl_nu,
            neq_xi=args.neq_xi,
            leq_signed=args.leq_signed,
        )
    except ValueError as exc:
        raise _Fail(EXIT_USAGE, "UsageError", str(exc))


def _sampling(args) -> SamplingConfig:
    return SamplingConfig(args.samples, args.seed, args.refine)


def _networks(specs: List[str], declared) -> dict:
    nets = {}
    for item in specs or ():
        if "=" in item:
            name, path = item.split("=", 1)
        elif len(declared) == 1:
            name, path = next(iter(declared)), item
        else:
            raise _Fail(EXIT_USAGE, "UsageError", f"--net {item}: use name=path when several networks are declared")
        try:
            net = netio.load_network(path)
        except OSError as exc:
            raise _Fail(EXIT_IO, "IOError", f"{path}: {exc.strerror or exc}")
        except netio.NetIOError as exc:
            raise _Fail(EXIT_EVAL, "NetIOError", str(exc))
        if name in declared and declared[name] != (net.input_dim, net.output_dim):
            m, n = declared[name]
            raise _Fail(
                EXIT_EVAL, "NetIOError",
                f"{path}: network '{name}' is declared Vec {m} -> Vec {n} but the file is "
                f"{net.input_dim} -> {net.output_dim}",
            )
        nets[name] = net
    return nets


def _context(path: Optional[str], spec, name=None) -> netio.Context:
    if not path:
        return netio.Context()
    try:
        return netio.load_context(path, spec.as_expr(name), spec.type_of(name))
    except OSError as exc:
        raise _Fail(EXIT_IO, "IOError", f"{path}: {exc.strerror or exc}")
    except netio.NetIOError as exc:
        raise _Fail(EXIT_EVAL, "NetIOError", f"{path}: {exc}")


def _arg_values(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise _Fail(EXIT_USAGE, "UsageError", f"--arg {item}: expected name=value")
        name, raw = item.split("=", 1)
        try:
            out[name] = json.loads(raw)
        except json.JSONDecodeError:
            raise _Fail(EXIT_USAGE, "UsageError", f"--arg {name}: value must be JSON (number, list, true/false)")
    return out


# ---------------------------------------------------------------------------
# Subcommands


def cmd_check(args) -> int:
    spec, t = load_spec(args.spec)
    root = spec.root
    print(f"ok: {root.name} : {t}")
    return 0


def cmd_eval(args) -> int:
    spec, _ = load_spec(args.spec)
    L = _logic(args)
    name = args.definition
    nets = _networks(args.net, spec.networks)
    ctx = _context(args.ctx, spec, name)
    values = dict(ctx.bindings)
    values.update(_arg_values(args.arg))
    sem = SemanticContext(L, nets, ctx.samplers, values, _sampling(args))
    try:
        if args.trace:
            g = compile_spec(spec, L, name)
            runner = _Runner(g, values, nets, ctx.samplers, sem.sampling)
            runner.run_scope(0)
            for node in g.nodes:
                if node["scope"] == 0:
                    v = runner.vals[node["id"]]
                    shown = "%.17g" % v if isinstance(v, float) else repr(v)
                    print(f"{node['id']:>5} {node['op']:<8} {shown}", file=sys.stderr)
            pen = runner.vals[g.outputs["penalty"]]
        else:
            e = spec.as_expr(name)
            value = apply_root(e, spec.type_of(name), sem, values)
            pen = Lg.penalty(L, value)
    except (EvalError, GraphError, Lg.DomainError, Lg.NegationUnsupported, NegationNotPushable) as exc:
        raise _Fail(EXIT_EVAL, type(exc).__name__, str(exc))
    print("%.17g" % float(pen))
    return 0


def cmd_props(args) -> int:
    params = dict(yager_p=args.yager_p, stl_nu=args.stl_nu, neq_xi=args.neq_xi, leq_signed=args.leq_signed)
    if args.all:
        logics = Lg.all_logics(**params)
    else:
        logics = [_logic(args)]
    props = args.property or list(P.PROPERTIES)
    for p in props:
        if p not in P.PROPERTIES:
            raise _Fail(EXIT_USAGE, "UsageError", f"unknown property {p!r}")
    verdicts = P.run_matrix(logics, args.trials, args.seed, props)
    if args.report == "structured":
        text = "".join(
            json.dumps(dict(v.to_dict(), expected=P.expected(v), matches=P.matches_table(v)), sort_keys=True) + "\n"
            for v in verdicts
        )
    else:
        text = P.format_text(verdicts)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise _Fail(EXIT_IO, "IOError", f"{args.output}: {exc.strerror or exc}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_train(args) -> int:
    from . import trainer as T

    spec, _ = load_spec(args.spec)
    L = _logic(args)
    try:
        net = netio.load_network(args.net)
        data = netio.load_dataset(args.data)
    except OSError as exc:
        raise _Fail(EXIT_IO, "IOError", f"{exc.filename}: {exc.strerror or exc}")
    except netio.NetIOError as exc:
        raise _Fail(EXIT_EVAL, "NetIOError", str(exc))
    ctx = _context(args.ctx, spec)
    try:
        cfg = T.TrainConfig(
            alpha=args.alpha, beta=args.beta, epochs=args.epochs, batch_size=args.batch_size,
            lr=args.lr, seed=args.seed, eval_samples=args.eval_samples, samples=args.samples,
            refine=args.refine, perturbation=args.perturbation,
        )
    except ValueError as exc:
        raise _Fail(EXIT_USAGE, "UsageError", str(exc))
    try:
        report = T.train(spec, net, data, ctx, L, cfg)
    except (EvalError, T.TrainingError, Lg.DomainError, NegationNotPushable) as exc:
        raise _Fail(EXIT_EVAL, type(exc).__name__, str(exc))
    for r in report.epochs:
        print(
            f"epoch {r.epoch:3d}  total {r.total:.6g}  ce {r.ce:.6g}  dl {r.dl:.6g}  "
            f"acc {r.accuracy:.4f}  sat {r.satisfaction:.4f}"
        )
    try:
        if args.report:
            with open(args.report, "w", encoding="utf-8") as fh:
                fh.write(report.dumps())
        if args.save_net:
            netio.save_network(net, args.save_net)
    except OSError as exc:
        raise _Fail(EXIT_IO, "IOError", f"{exc.filename}: {exc.strerror or exc}")
    return 0


def cmd_compile(args) -> int:
    spec, _ = load_spec(args.spec)
    L = _logic(args)
    try:
        g = compile_spec(spec, L, args.definition)
    except (EvalError, GraphError, Lg.NegationUnsupported, NegationNotPushable) as exc:
        raise _Fail(EXIT_EVAL, type(exc).__name__, str(exc))
    text = g.dumps()
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise _Fail(EXIT_IO, "IOError", f"{args.output}: {exc.strerror or exc}")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------


def _logic_flags(p, default="dl2"):
    p.add_argument("--logic", default=default, help="dl2, godel, lukasiewicz, yager, product or stl")
    p.add_argument("--yager-p", type=float, default=2.0)
    p.add_argument("--stl-nu", type=float, default=1.0)
    p.add_argument("--neq-xi", type=float, default=1.0)
    p.add_argument("--leq-signed", action="store_true", help="fuzzy <= as 1 - max(tanh(a - b), 0)")


def _sampling_flags(p):
    p.add_argument("--samples", type=int, default=64, help="samples per infinite quantifier")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--refine", type=int, default=0, help="coordinate-descent refinement rounds")


def build_parser() -> argparse.ArgumentParser:
    ap = _ArgParser(prog="ldl", description="Differentiable logic compiler and evaluator.")
    ap.add_argument("--json-errors", action="store_true", help="report errors as JSON on stderr")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json-errors", action="store_true", default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_ArgParser)

    p = sub.add_parser("check", parents=[common], help="parse and typecheck a specification")
    p.add_argument("spec")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("eval", parents=[common], help="print the loss of a specification")
    p.add_argument("spec")
    p.add_argument("--ctx")
    p.add_argument("--net", action="append", help="network file, or name=path")
    p.add_argument("--arg", action="append", help="parameter value as name=JSON")
    p.add_argument("--definition", help="definition to evaluate (default: the last)")
    p.add_argument("--trace", action="store_true", help="print per-node values to stderr")
    _logic_flags(p)
    _sampling_flags(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("props", parents=[common], help="check the algebraic and logical properties of the logics")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true")
    _logic_flags(p)
    p.add_argument("--property", action="append")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", choices=("text", "structured"), default="text")
    p.add_argument("--output", "-o")
    p.set_defaults(fn=cmd_props)

    p = sub.add_parser("train", parents=[common], help="train a network against cross-entropy and a specification")
    p.add_argument("--spec", required=True)
    p.add_argument("--net", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--ctx")
    _logic_flags(p)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--eval-samples", type=int, default=200)
    p.add_argument("--perturbation", type=float, default=0.1)
    p.add_argument("--report", help="write one JSON row per epoch")
    p.add_argument("--save-net", help="write the trained network")
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--refine", type=int, default=0)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("compile", parents=[common], help="emit the expression graph of a specification")
    p.add_argument("spec")
    p.add_argument("--definition")
    p.add_argument("--output", "-o")
    _logic_flags(p)
    p.set_defaults(fn=cmd_compile)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except _Fail as f:
        if args.json_errors:
            err = {"error": f.kind, "message": str(f), "exit": f.code}
            if f.line:
                err.update(line=f.line, col=f.col)
            print(json.dumps(err, sort_keys=True), file=sys.stderr)
        else:
            print(f"ldl: {f}", file=sys.stderr)
        return f.code


if __name__ == "__main__":
    sys.exit(main())
