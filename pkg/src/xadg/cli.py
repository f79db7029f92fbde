"""Command-line interface: one sub-command per pipeline stage."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from .adg import Adg, check_well_formed, extract_adg, simplify_adg
from .dataset import Dataset, DatasetError, Recipe, encode_rows, load_dataset, read_rows, split
from .dtree import DecisionTree, fit
from .experiment import (
    BASELINES,
    DEFAULT_DEPTHS,
    REFERENCE_RANGES,
    ExperimentConfig,
    ExperimentError,
    ExperimentFile,
    compare_baseline,
    format_table,
    run_experiment,
)
from .extended import PipelineConfig, Xadg, build_xadg, check_well_built, compact, lift
from .inference import classify_dataset, equivalence_report, write_predictions

log = logging.getLogger("xadg")


class CliError(Exception):
    pass


def _data_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--data", required=required, help="CSV file with a header row")
    p.add_argument("--target", help="target column (may come from --recipe)")
    p.add_argument("--recipe", help="JSON preprocessing recipe")


def _tree_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--train-fraction",
        type=float,
        help="fit on a seeded split of this size instead of the whole file",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xadg", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("fit-tree", help="fit a decision tree and save it as JSON")
    _data_args(p)
    _tree_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("extract", help="tree -> well-formed ADG")
    p.add_argument("--tree", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "dot"), default="json")

    p = sub.add_parser("simplify", help="ADG -> simplified ADG")
    p.add_argument("--adg", required=True)
    p.add_argument("--tree", help="source tree (defaults to the one embedded in the ADG)")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "dot"), default="json")

    p = sub.add_parser("build-xadg", help="data or simplified ADG -> xADG")
    _data_args(p, required=False)
    _tree_args(p)
    p.add_argument("--adg", help="start from this simplified ADG instead of fitting a tree")
    p.add_argument("--max-supports", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "dot"), default="json")

    p = sub.add_parser("classify", help="classify every row of a CSV")
    p.add_argument("--xadg", help="graph to classify with")
    p.add_argument("--adg", help="ADG to classify with")
    p.add_argument("--data", required=True)
    p.add_argument("--fallback", help="class reported when undecided (default: training majority)")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("evaluate", help="repeated runs with 95%% confidence intervals")
    _data_args(p, required=False)
    p.add_argument("--config", help="JSON experiment file (data, recipe, depth, runs, seed)")
    p.add_argument("--name", choices=sorted(REFERENCE_RANGES), help="benchmark name for depth and reference")
    p.add_argument("--max-depth", type=int)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--max-supports", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--baseline", choices=sorted(BASELINES))
    p.add_argument("--out", help="results JSON")
    p.add_argument("--table", help="also write the text table here")

    p = sub.add_parser("export-dot", help="render a tree, ADG or xADG as Graphviz DOT")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--tree")
    g.add_argument("--adg")
    g.add_argument("--xadg")
    p.add_argument("--out", required=True)

    p = sub.add_parser("check", help="run well-formedness, well-built and equivalence checks")
    p.add_argument("--tree")
    p.add_argument("--adg")
    p.add_argument("--xadg")
    p.add_argument("--data", help="CSV used for the equivalence check")
    return parser


def _recipe(args) -> Recipe | None:
    if not getattr(args, "recipe", None):
        return None
    try:
        return Recipe.from_file(args.recipe)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read recipe {args.recipe}: {exc}") from exc


def _dataset(args) -> Dataset:
    recipe = _recipe(args)
    if not args.target and not (recipe and recipe.target):
        raise CliError("--target or a recipe with a target is required")
    return load_dataset(args.data, args.target, recipe)


def _training_part(args, ds: Dataset) -> Dataset:
    if args.train_fraction is None:
        return ds
    return split(ds, args.train_fraction, args.seed)[0]


def _load(cls, path: str | None, what: str):
    if path is None:
        raise CliError(f"--{what} is required")
    p = Path(path)
    if not p.is_file():
        raise CliError(f"{what} file not found: {path}")
    try:
        return cls.load(p)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{path} is not a valid {what} file: {exc}") from exc


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)
    print(f"wrote {path}")


def _write_graph(g, args) -> None:
    if args.format == "dot":
        _write(args.out, g.to_dot())
    else:
        _write(args.out, json.dumps(g.to_json(), indent=1) + "\n")


def cmd_fit_tree(args) -> int:
    ds = _training_part(args, _dataset(args))
    dt = fit(ds, args.max_depth, args.seed)
    dt.save(args.out)
    s = dt.stats()
    print(f"tree: {s['nodes']} nodes, depth {s['depth']}; wrote {args.out}")
    return 0


def cmd_extract(args) -> int:
    dt = _load(DecisionTree, args.tree, "tree")
    adg = extract_adg(dt)
    print(f"ADG: {len(adg.arguments)} arguments, {len(adg.attacks)} attacks")
    _write_graph(adg, args)
    return 0


def cmd_simplify(args) -> int:
    adg = _load(Adg, args.adg, "adg")
    dt = _load(DecisionTree, args.tree, "tree") if args.tree else adg.tree
    if dt is None:
        raise CliError("the ADG carries no tree; pass --tree")
    out = simplify_adg(dt, adg)
    print(f"simplified ADG: {len(out.arguments)} arguments, {len(out.attacks)} attacks")
    _write_graph(out, args)
    return 0


def cmd_build_xadg(args) -> int:
    config = PipelineConfig(args.max_depth, args.seed, args.max_supports)
    if args.adg:
        adg = _load(Adg, args.adg, "adg")
        ds = _training_part(args, _dataset(args)) if args.data else None
        g = compact(lift(adg), config, ds)[1]
    else:
        if not args.data:
            raise CliError("build-xadg needs --data or --adg")
        g = build_xadg(_training_part(args, _dataset(args)), config).xadg
    print(f"xADG: {len(g.arguments)} arguments, {len(g.attacks)} attacks")
    _write_graph(g, args)
    return 0


def _graph_for(args) -> Xadg:
    if args.xadg:
        return _load(Xadg, args.xadg, "xadg")
    if args.adg:
        return lift(_load(Adg, args.adg, "adg"))
    raise CliError("--xadg or --adg is required")


def _encode(path: str, g) -> Dataset:
    return encode_rows(read_rows(path), g.features, g.target, strict_labels=False)


def cmd_classify(args) -> int:
    g = _graph_for(args)
    ds = _encode(args.data, g)
    fallback = args.fallback
    if fallback is None:
        fallback = g.tree.classes[g.tree.root.prediction] if g.tree is not None else None
    rows = classify_dataset(g, ds, fallback)
    write_predictions(rows, args.out, args.format)
    undecided = sum(r["status"] != "decided" for r in rows)
    print(f"classified {len(rows)} rows ({undecided} undecided); wrote {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    meta = {}
    if args.config:
        spec = ExperimentFile.load(args.config)
        ds = spec.dataset()
        config = spec.config()
        name = spec.name
        meta["config_file"] = args.config
    else:
        if not args.data:
            raise CliError("evaluate needs --data or --config")
        ds = _dataset(args)
        name = args.name
        depth = args.max_depth or DEFAULT_DEPTHS.get(name or "", 6)
        config = ExperimentConfig(
            depth, args.runs, args.train_fraction, args.seed, args.max_supports, args.workers
        )
    result = run_experiment(ds, config, dataset=name, data=str(args.data or ""))
    table = format_table(result.summary, REFERENCE_RANGES.get(name or ""), title=name or "")
    if args.baseline:
        table += "\nbaseline " + args.baseline + "\n"
        for row in compare_baseline(result.summary, args.baseline):
            table += f"  {row['metric']:<20}{row['baseline']:>8}  ->  {row['mean']:.3f}  (delta {row['delta']:+.3f})\n"
    print(table, end="")
    if args.out:
        result.save(args.out)
        print(f"wrote {args.out}")
    if args.table:
        _write(args.table, table)
    return 0


def cmd_export_dot(args) -> int:
    if args.tree:
        g = _load(DecisionTree, args.tree, "tree")
        text = tree_to_dot(g)
    elif args.adg:
        text = _load(Adg, args.adg, "adg").to_dot()
    else:
        text = _load(Xadg, args.xadg, "xadg").to_dot()
    _write(args.out, text)
    return 0


def tree_to_dot(dt: DecisionTree) -> str:
    from .dot import digraph

    nodes, edges = [], []
    for n in dt.nodes:
        if n.is_leaf:
            label = f"{dt.classes[n.prediction]}\n{list(n.counts)}"
            nodes.append((f"n{n.id}", {"label": label, "shape": "box"}))
        else:
            nodes.append((f"n{n.id}", {"label": f"{n.split.feature}\n{list(n.counts)}"}))
            for child in (n.true_child, n.false_child):
                edges.append((f"n{n.id}", f"n{child}", {"label": dt.edge_predicate(child).describe()}))
    return digraph("tree", nodes, edges)


def cmd_check(args) -> int:
    if not (args.adg or args.xadg):
        raise CliError("check needs --adg and/or --xadg")
    failures = 0
    adg = _load(Adg, args.adg, "adg") if args.adg else None
    g = _load(Xadg, args.xadg, "xadg") if args.xadg else None
    dt = _load(DecisionTree, args.tree, "tree") if args.tree else None
    if adg is not None:
        problems = check_well_formed(adg)
        print(f"well-formed: {'ok' if not problems else f'{len(problems)} violations'}")
        for p in problems:
            print(f"  {p}")
        failures += bool(problems)
    if g is not None:
        problems = check_well_built(g)
        print(f"well-built: {'ok' if not problems else f'{len(problems)} violations'}")
        for p in problems:
            print(f"  {p}")
        failures += bool(problems)
    if args.data:
        dt = dt or (g.tree if g is not None else None) or (adg.tree if adg is not None else None)
        worst = 1.0
        if dt is None:
            raise CliError("equivalence needs a tree (--tree or one embedded in the graph)")
        graphs = [(label, gr) for label, gr in (("adg", adg), ("xadg", g)) if gr is not None]
        for label, graph in graphs:
            rep = equivalence_report(dt, graph, _encode(args.data, graph))
            detail = f"{rep.agree}/{rep.total} agree, {rep.undecided} undecided"
            print(f"equivalence ({label}): {rep.rate:.0%} ({detail})")
            for i, want, got in rep.disagree[:20]:
                print(f"  row {i}: tree {want!r}, graph {got!r}")
            failures += bool(rep.disagree)
            worst = min(worst, rep.rate)
        print(f"equivalence: {worst:.0%}")
    return 1 if failures else 0


COMMANDS = {
    "fit-tree": cmd_fit_tree,
    "extract": cmd_extract,
    "simplify": cmd_simplify,
    "build-xadg": cmd_build_xadg,
    "classify": cmd_classify,
    "evaluate": cmd_evaluate,
    "export-dot": cmd_export_dot,
    "check": cmd_check,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (CliError, DatasetError, ExperimentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
