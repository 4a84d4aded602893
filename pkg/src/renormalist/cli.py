"""Command-line front end.

    renormalist trees CONFIG        enumerate trees of the right-hand side and solution sectors
    renormalist negatives CONFIG    counterterm trees with their forests and potential depth
    renormalist renorm CONFIG       renormalised equation for the configured constants
    renormalist counterterms CONFIG numerical constants over an eps grid with divergence fits
    renormalist graphcheck GRAPH    power-counting conditions of a labelled graph (JSON)
    renormalist selftest            fixture regression checks

CONFIG is a TOML path or the name of a bundled fixture (gpam, phi43, phi34,
phi43_rules).  Errors go to stderr as one JSON object and set a nonzero
exit code that identifies the failure class.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import config as cfgmod
from .counterterms import (
    DIAGRAMS,
    EQUATION_CONSTANTS,
    FitError,
    QuadConfig,
    QuadratureError,
    fit_divergence,
    power_counting,
    sweep,
)
from .equation import EquationError
from .graph_power import GraphError, LabelledGraph, bound_exponent, check_assumptions
from .group import (
    GroupError,
    Universe,
    deepest_colouring,
    inverse,
    maximal_chain,
    random_character,
    star,
    unit,
)
from .homogeneity import Homogeneity
from .renorm_eq import RenormError, pretty, renormalized_equation
from .rules import RuleError, is_equation_like, is_subcritical
from .subforests import counterterm_trees, negative_forests
from .trees import (
    GenerationBudgetExceeded,
    TreeError,
    count_noises,
    generate_trees,
    homogeneity,
    plane_count,
    second_homogeneity,
    solution_trees,
    symmetry_factor,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_VALIDATION = 5
EXIT_COMPUTE = 6
EXIT_NUMERIC = 7

FORMATS = ("text", "json", "dot", "csv")
DEFAULT_KAPPA = Fraction(1, 100)
GRAPH_DIR = cfgmod.DATA_DIR / "graphs"


class CliError(Exception):
    def __init__(self, kind, message, code):
        super().__init__(message)
        self.kind = kind
        self.code = code


def _classify(exc):
    if isinstance(exc, CliError):
        return exc.kind, exc.code
    if isinstance(exc, cfgmod.ConfigParseError):
        return "parse", EXIT_PARSE
    if isinstance(exc, (OSError, UnicodeDecodeError)):
        return "io", EXIT_IO
    if isinstance(exc, json.JSONDecodeError):
        return "parse", EXIT_PARSE
    if isinstance(exc, (cfgmod.ConfigError, EquationError, RuleError, GraphError, TreeError)):
        return "validation", EXIT_VALIDATION
    if isinstance(exc, (QuadratureError, FitError)):
        return "numeric", EXIT_NUMERIC
    if isinstance(exc, (GenerationBudgetExceeded, GroupError, RenormError)):
        return "compute", EXIT_COMPUTE
    return None, None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", f"{self.prog}: {message}", EXIT_USAGE)


# ------------------------------------------------------------------ helpers


def _kappa(args):
    if args.kappa is None:
        return DEFAULT_KAPPA
    try:
        k = Fraction(args.kappa)
    except (ValueError, ZeroDivisionError):
        raise CliError("usage", f"--kappa expects a rational number, got {args.kappa!r}", EXIT_USAGE)
    if k <= 0:
        raise CliError("usage", "--kappa must be positive", EXIT_USAGE)
    return k


def _degree_arg(text, flag):
    try:
        return Homogeneity.parse(text)
    except ValueError as exc:
        raise CliError("usage", f"{flag}: {exc}", EXIT_USAGE) from exc


def _num(h: Homogeneity, kappa):
    return "inf" if h.is_infinite() else str(h.substitute(kappa))


def _emit_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _emit_json(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False)


def _table(header, rows):
    rows = [[str(c) for c in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(header)]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    return "\n".join([line(header), line(["-" * w for w in widths])] + [line(r) for r in rows])


def _fill(depth, top):
    if depth == 0 or top == 0:
        return "white"
    return f"gray{max(20, 95 - (75 * depth) // top)}"


def _dot_tree(T, name, depths=None, label=""):
    lines = [f'digraph "{name}" {{', "  rankdir=BT;"]
    if label:
        lines.append(f'  label="{label}";')
    top = max(depths) if depths else 0
    for n in range(T.n_nodes):
        shape = "doublecircle" if n == 0 else "circle"
        if depths is None:
            lines.append(f'  n{n} [shape={shape}, label=""];')
        else:
            d = depths[n]
            lines.append(f'  n{n} [shape={shape}, style=filled, fillcolor={_fill(d, top)}, label="{d or ""}"];')
    for e in T.edges():
        lines.append(f'  n{e} -> n{T.parent[e]} [label="{T.etype[e]}"];')
    lines.append("}")
    return "\n".join(lines)


def _sectors(cfg, args):
    gamma = _degree_arg(args.gamma, "--gamma") if args.gamma else None
    rhs_cut = gamma or cfg.cutoffs.rhs
    sol_cut = gamma or cfg.cutoffs.solution
    target = cfg.target
    budget = cfg.cutoffs.node_budget
    out = {}
    if args.sector in ("rhs", "all"):
        out["rhs"] = (rhs_cut, generate_trees(cfg.rule, cfg.alphabet, target, rhs_cut, node_budget=budget))
    if args.sector in ("solution", "all"):
        out["solution"] = (sol_cut, solution_trees(cfg.rule, cfg.alphabet, target, sol_cut, node_budget=budget))
    return out


def _all_trees(cfg):
    budget = cfg.cutoffs.node_budget
    rhs = generate_trees(cfg.rule, cfg.alphabet, cfg.target, cfg.cutoffs.rhs, node_budget=budget)
    sol = solution_trees(cfg.rule, cfg.alphabet, cfg.target, cfg.cutoffs.solution, node_budget=budget)
    return rhs, sol


# ------------------------------------------------------------------ commands


def cmd_trees(cfg, args):
    kappa = _kappa(args)
    delta0 = _degree_arg(args.delta0, "--delta0") if args.delta0 else cfg.cutoffs.delta0
    sectors = _sectors(cfg, args)
    a = cfg.alphabet
    report = {"config": cfg.name, "target": cfg.target, "delta0": str(delta0), "kappa": str(kappa), "sectors": {}}
    for sec, (cut, trees) in sectors.items():
        rows = []
        for T in trees:
            deg = homogeneity(T, a)
            rows.append({
                "code": T.code,
                "degree": str(deg),
                "degree_value": _num(deg, kappa),
                "second_homogeneity": str(second_homogeneity(T, a, delta0)),
                "symmetry_factor": symmetry_factor(T),
                "plane_count": plane_count(T),
                "noises": count_noises(T, a),
            })
        report["sectors"][sec] = {"cutoff": str(cut), "count": len(rows), "trees": rows}
    fmt = args.format
    if fmt == "json":
        return _emit_json(report)
    if fmt == "csv":
        rows = [[sec, r["code"], r["degree"], r["degree_value"], r["second_homogeneity"],
                 r["symmetry_factor"], r["plane_count"], r["noises"]]
                for sec, s in report["sectors"].items() for r in s["trees"]]
        return _emit_csv(["sector", "code", "degree", "degree_value", "second_homogeneity",
                          "symmetry_factor", "plane_count", "noises"], rows)
    if fmt == "dot":
        return "\n".join(
            _dot_tree(T, f"{sec}_{i}", label=T.code)
            for sec, (_, trees) in sectors.items()
            for i, T in enumerate(trees)
        )
    parts = [f"# {cfg.name}: trees for {cfg.target}, delta0 = {delta0}, kappa = {kappa}"]
    for sec, s in report["sectors"].items():
        parts.append(f"\n[{sec}] cutoff {s['cutoff']}: {s['count']} trees")
        parts.append(_table(
            ["code", "degree", "value", "second", "S", "plane", "noises"],
            [[r["code"], r["degree"], r["degree_value"], r["second_homogeneity"], r["symmetry_factor"],
              r["plane_count"], r["noises"]] for r in s["trees"]],
        ))
    return "\n".join(parts)


def _negatives(cfg):
    rhs, sol = _all_trees(cfg)
    return counterterm_trees(rhs + sol, cfg.alphabet)


def cmd_negatives(cfg, args):
    kappa = _kappa(args)
    a = cfg.alphabet
    neg = _negatives(cfg)
    rows = []
    colourings = []
    for T in neg:
        deg = homogeneity(T, a)
        chain = maximal_chain(T, (), a)
        colourings.append(deepest_colouring(T, a))
        rows.append({
            "code": T.code,
            "degree": str(deg),
            "degree_value": _num(deg, kappa),
            "noises": count_noises(T, a),
            "symmetry_factor": symmetry_factor(T),
            "negative_forests": len(negative_forests(T, a)),
            "potential_depth": len(chain) - 1,
        })
    fmt = args.format
    if fmt == "json":
        return _emit_json({"config": cfg.name, "count": len(rows), "trees": rows})
    if fmt == "csv":
        keys = list(rows[0]) if rows else ["code"]
        return _emit_csv(keys, [[r[k] for k in keys] for r in rows])
    if fmt == "dot":
        out = []
        for i, (T, ct) in enumerate(zip(neg, colourings)):
            depths = [ct.node_depth(n) for n in range(T.n_nodes)]
            out.append(_dot_tree(T, f"negative_{i}", depths, label=T.code))
        return "\n".join(out)
    head = f"# {cfg.name}: {len(rows)} counterterm trees (negative degree, even number of noises)"
    return head + "\n" + _table(
        ["code", "degree", "value", "noises", "S", "forests", "depth"],
        [[r["code"], r["degree"], r["degree_value"], r["noises"], r["symmetry_factor"],
          r["negative_forests"], r["potential_depth"]] for r in rows],
    )


def _parse_constants(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise CliError("usage", f"--constant expects CODE=EXPR, got {item!r}", EXIT_USAGE)
        code, expr = item.split("=", 1)
        out[code.strip()] = expr.strip()
    return out


def cmd_renorm(cfg, args):
    if cfg.spec is None:
        raise CliError("validation", "renorm needs an [equation] config, not a bare rule table", EXIT_VALIDATION)
    values = cfg.renorm.values()
    values.update(_parse_constants(args.constant))
    if not values:
        raise CliError("validation", "no renormalisation constants given", EXIT_VALIDATION)
    neg = _negatives(cfg)
    eq = renormalized_equation(cfg.spec, values, cfg.renorm.contraction_map(), negatives=neg)
    data = eq.to_json()
    fmt = args.format
    if fmt == "json":
        return _emit_json({"config": cfg.name, **data})
    if fmt == "csv":
        return _emit_csv(["tree", "term"], [[c["tree"], c["term"]] for c in data["counterterms"]])
    if fmt == "dot":
        raise CliError("usage", "renorm has no DOT output", EXIT_USAGE)
    lines = [f"# {cfg.name}: renormalised right-hand side", data["equation"], "", "terms:"]
    lines += [f"  {t}" for t in data["terms"]]
    lines += ["", "counterterms:"]
    lines += [f"  {c['tree']}: {c['term']}" for c in data["counterterms"]]
    if data["vanishing"]:
        lines += ["", "vanishing:"] + [f"  {c}" for c in data["vanishing"]]
    return "\n".join(lines)


def _counterterm_equation(cfg):
    name = cfg.counterterms.equation or cfg.name
    if name not in EQUATION_CONSTANTS:
        raise CliError(
            "validation",
            f"no numerical constants for {name!r}; set [counterterms] equation to one of "
            + ", ".join(sorted(EQUATION_CONSTANTS)),
            EXIT_VALIDATION,
        )
    return name


def cmd_counterterms(cfg, args):
    name = _counterterm_equation(cfg)
    grid = cfgmod.parse_eps_grid(args.eps_grid) if args.eps_grid else cfg.counterterms.eps_grid
    if not grid:
        grid = cfgmod.parse_eps_grid("2^-3..2^-8")
    quad = QuadConfig(n=args.n or cfg.counterterms.n)
    results = sweep(name, grid, quad, strict=cfg.counterterms.strict)
    names = [est.name for est in results[0][1]]
    samples = {n: [] for n in names}
    rows = []
    for eps, row in results:
        for est in row:
            samples[est.name].append((eps, est.value))
            rows.append((eps, est.name, est.value, est.error))
    fits = []
    for diagram, cname in zip(DIAGRAMS[name], names):
        pred = power_counting(diagram)
        try:
            fit = fit_divergence(samples[cname])
        except FitError as exc:
            fits.append({"constant": cname, "error": str(exc), "predicted": pred.to_json()})
            continue
        fits.append({
            "constant": cname,
            "model": fit.model,
            "p": fit.p,
            "a": fit.a,
            "b": fit.b,
            "residual": fit.residual,
            "predicted": pred.to_json(),
            "match": fit.model == pred.model,
        })
    fmt = args.format
    if fmt == "json":
        return _emit_json({
            "equation": name,
            "quadrature_nodes": quad.n,
            "samples": [{"eps": e, "constant": c, "value": v, "error": err} for e, c, v, err in rows],
            "fits": fits,
        })
    if fmt == "dot":
        raise CliError("usage", "counterterms has no DOT output", EXIT_USAGE)
    if fmt == "csv":
        table = _emit_csv(["eps", "constant", "value", "error"], [(repr(e), c, repr(v), repr(err)) for e, c, v, err in rows])
        fit_rows = [
            (f["constant"], f.get("model", "error"), "" if f.get("p") is None else repr(f["p"]),
             repr(f.get("residual", "")), f["predicted"]["model"], f["predicted"]["log_power"], f.get("match", False))
            for f in fits
        ]
        summary = _emit_csv(["constant", "model", "p", "residual", "predicted", "log_power", "match"], fit_rows)
        return table + "\n\n" + summary
    lines = [f"# {name}: constants on {len(grid)} values of eps ({quad.n} nodes per panel)"]
    lines.append(_table(["eps", "constant", "value", "error"],
                        [[f"{e:.6g}", c, f"{v:.10g}", f"{err:.2g}"] for e, c, v, err in rows]))
    lines.append("\nfits:")
    lines.append(_table(
        ["constant", "model", "p", "residual", "predicted", "match"],
        [[f["constant"], f.get("model", "error"), "" if f.get("p") is None else f"{f['p']:.4f}",
          f"{f.get('residual', float('nan')):.3%}", f["predicted"]["model"], f.get("match", False)] for f in fits],
    ))
    return "\n".join(lines)


def _load_graph(arg):
    p = Path(arg)
    if not p.exists():
        p = GRAPH_DIR / (arg if arg.endswith(".json") else arg + ".json")
    if not p.exists():
        raise FileNotFoundError(f"no such graph file or bundled graph: {arg}")
    return LabelledGraph.from_json(json.loads(p.read_text(encoding="utf-8")))


def cmd_graphcheck(args):
    G = _load_graph(args.input)
    res = check_assumptions(G)
    alpha = bound_exponent(G)
    kappa = _kappa(args)
    data = {"graph": G.name, **res.to_json(), "bound_exponent": str(alpha),
            "bound_exponent_value": _num(alpha, kappa)}
    fmt = args.format
    if fmt == "json":
        out = _emit_json(data)
    elif fmt == "csv":
        keys = list(data)
        out = _emit_csv(keys, [[json.dumps(v) if isinstance(v, list) else v for v in data.values()]])
    elif fmt == "dot":
        lines = [f'digraph "{G.name or "graph"}" {{']
        for v in G.vertices:
            shape = "doublecircle" if v == G.star else ("box" if v in G.distinguished else "circle")
            lines.append(f'  "{v}" [shape={shape}];')
        for e in G.edges:
            style = ", style=dashed" if e.r else ""
            lines.append(f'  "{e.tail}" -> "{e.head}" [label="{e.a}"{style}];')
        lines.append("}")
        out = "\n".join(lines)
    else:
        status = "pass" if res.passed else (
            f"FAIL condition {res.condition} on {{{', '.join(res.subset)}}}: "
            f"lhs {res.lhs}, rhs {res.rhs}, slack {res.slack}"
        )
        out = f"{G.name or args.input}: {status}\nbound exponent {alpha} ({_num(alpha, kappa)})"
    return out, (EXIT_OK if res.passed else EXIT_CHECK_FAILED)


# ------------------------------------------------------------------ selftest

EXPECTED_COUNTS = {"gpam": (4, 2, 2), "phi43": (8, 4, 3), "phi34": (9, 5, 4)}
EXPECTED_RENORM = {
    "gpam": "A*Du**2 - C*f(u)*f'(u) - Cp*trA*f(u)**2 + xi*f(u)",
    "phi43": "3*C*u - 9*Cp*u - u**3 + xi",
    "phi34": "-C1 - 4*C11*u - C2*s - 4*C211 - C22j + u**2 + xi",
}


def _selftest(seed):
    checks = []
    for name, (n_rhs, n_sol, n_neg) in EXPECTED_COUNTS.items():
        cfg = cfgmod.resolve(name)
        rhs, sol = _all_trees(cfg)
        neg = counterterm_trees(rhs + sol, cfg.alphabet)
        got = (len(rhs), len(sol), len(neg))
        checks.append((f"{name} tree counts", got == (n_rhs, n_sol, n_neg), f"{got}"))
        ok = is_subcritical(cfg.rule, cfg.alphabet) is not None and is_equation_like(cfg.rule, cfg.alphabet)[0]
        checks.append((f"{name} rule subcritical and equation-like", ok, ""))
        again = cfgmod.loads(cfgmod.dumps(cfg), name)
        checks.append((f"{name} config round trip", cfgmod.same_config(cfg, again), ""))
        if name in EXPECTED_RENORM:
            eq = renormalized_equation(cfg.spec, cfg.renorm.values(), cfg.renorm.contraction_map(), neg)
            text = pretty(eq.total)
            checks.append((f"{name} renormalised equation", text == EXPECTED_RENORM[name], text))
    cfg = cfgmod.resolve("phi43")
    uni = Universe(_negatives(cfg), cfg.alphabet)
    rng = random.Random(seed)
    e = unit()
    ok = True
    for i in range(3):
        f, g, h = (random_character(uni, rng, n) for n in "fgh")
        ok &= star(star(f, g, uni), h, uni) == star(f, star(g, h, uni), uni)
        ok &= star(g, e, uni) == g and star(e, g, uni) == g
        ig = inverse(g, uni)
        ok &= star(g, ig, uni) == e and star(ig, g, uni) == e
    checks.append((f"group axioms on the phi43 universe (seed {seed})", ok, f"{len(uni.keys)} coloured trees"))
    for path in sorted(GRAPH_DIR.glob("*.json")):
        G = _load_graph(str(path))
        res = check_assumptions(G)
        want = not path.stem.endswith("violation")
        checks.append((f"graph {path.stem}", res.passed == want, "pass" if res.passed else f"condition {res.condition}"))
    return checks


def cmd_selftest(args):
    checks = _selftest(args.seed)
    failed = [c for c in checks if not c[1]]
    if args.format == "json":
        out = _emit_json({"passed": not failed,
                          "checks": [{"name": n, "passed": bool(ok), "detail": d} for n, ok, d in checks]})
    elif args.format == "csv":
        out = _emit_csv(["check", "passed", "detail"], [(n, bool(ok), d) for n, ok, d in checks])
    else:
        lines = [f"{'PASS' if ok else 'FAIL'}  {n}" + (f"  [{d}]" if d else "") for n, ok, d in checks]
        lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
        out = "\n".join(lines)
    return out, (EXIT_CHECK_FAILED if failed else EXIT_OK)


# ------------------------------------------------------------------ entry point


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--kappa", help="rational value substituted for kappa in numeric columns (default 1/100)")
    p = _Parser(prog="renormalist", description="Trees, counterterms and power counting for subcritical SPDEs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("trees", parents=[common], help="enumerate trees below the cutoffs")
    t.add_argument("input")
    t.add_argument("--gamma", help="cutoff on the tree degree (overrides the config)")
    t.add_argument("--delta0", help="jet cutoff for the second homogeneity")
    t.add_argument("--sector", choices=("rhs", "solution", "all"), default="all")

    n = sub.add_parser("negatives", parents=[common], help="counterterm trees")
    n.add_argument("input")

    r = sub.add_parser("renorm", parents=[common], help="renormalised equation")
    r.add_argument("input")
    r.add_argument("--constant", action="append", metavar="CODE=EXPR", help="value of a tree (repeatable)")

    c = sub.add_parser("counterterms", parents=[common], help="numerical constants and divergence fits")
    c.add_argument("input")
    c.add_argument("--eps-grid", help='e.g. "2^-3..2^-8" or "0.1,0.05,0.025"')
    c.add_argument("--n", type=int, help="Gauss-Legendre nodes per panel (the estimate uses twice as many)")

    g = sub.add_parser("graphcheck", parents=[common], help="check the power-counting conditions of a graph")
    g.add_argument("input")

    s = sub.add_parser("selftest", parents=[common], help="fixture regression checks")
    s.add_argument("--seed", type=int, default=0)
    return p


def run(argv=None):
    """Return (exit code, stdout text, stderr text)."""
    try:
        args = build_parser().parse_args(argv)
        if args.command == "graphcheck":
            out, code = cmd_graphcheck(args)
        elif args.command == "selftest":
            out, code = cmd_selftest(args)
        else:
            cfg = cfgmod.resolve(args.input)
            handler = {"trees": cmd_trees, "negatives": cmd_negatives, "renorm": cmd_renorm,
                       "counterterms": cmd_counterterms}[args.command]
            out, code = handler(cfg, args), EXIT_OK
        return code, out, ""
    except Exception as exc:  # noqa: BLE001
        kind, code = _classify(exc)
        if kind is None:
            raise
        err = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
        line = getattr(exc, "line", None)
        if line:
            err["line"] = line
        return code, "", json.dumps(err)


def main(argv=None):
    code, out, err = run(argv)
    if out:
        sys.stdout.write(out + "\n")
    if err:
        sys.stderr.write(err + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
