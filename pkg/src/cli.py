from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import yaml
from dotenv import load_dotenv

from .errors import PlanFormatError, PlanShapeError, PlanToolError
from .pipeline import PlanToolkit
from .plan import level_str
from .recipes import catalog, get_recipe
from .utils.arrays import HadamardMatrix, hadamard, oa_rao, q_augment, q_from_hadamard, verify_strength2
from .utils.formats import array_from_dict, array_to_dict, dumps, format_matrix, load_json, read_plan_document
from .utils.gf import cosets, cyclotomy_formula, cyclotomy_number, field_new
from .verify import recount_incidence

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = Path("config.yaml")
CONFIG_ENV = "PLANKIT_CONFIG"
RECIPE_PARAMS = ("s", "h", "n", "m", "a", "b", "c", "d", "delta")

EXIT_OK = 0
EXIT_CLAIM_FAILED = 1
EXIT_CONSTRAINT = 2
EXIT_IO = 3


def load_config(path: Path, explicit: bool = True) -> dict:
    if not path.exists():
        if explicit:
            raise FileNotFoundError(path)
        return {}
    with path.open("r", encoding="utf-8") as handle:
        data = yaml.safe_load(handle) or {}
    if not isinstance(data, dict):
        raise PlanFormatError(f"{path} must hold a YAML mapping")
    return data


def configure_logging(config: dict, level: Optional[str]) -> None:
    log_cfg = config.get("logging") or {}
    logging.basicConfig(
        level=(level or log_cfg.get("level") or "WARNING").upper(),
        format=log_cfg.get("format", "%(levelname)s %(name)s: %(message)s"),
        force=True,
    )


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Blocked main-effect plan toolkit")
    parser.add_argument("--config", type=Path, default=None, help="Path to YAML config (default config.yaml)")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    commands = parser.add_subparsers(dest="command", required=True)

    cat = commands.add_parser("catalog", help="List construction recipes")
    cat.add_argument("--id", dest="recipe_id", default=None, help="Show one recipe")
    cat.add_argument("--json", action="store_true", help="Machine-readable listing")

    gen = commands.add_parser("gen", help="Generate a plan from a recipe")
    gen.add_argument("--id", dest="recipe_id", required=True)
    for name in RECIPE_PARAMS:
        gen.add_argument(f"--{name}", type=int, default=None)
    gen.add_argument("-o", "--output", type=Path, default=None, help="Output file (default from config)")
    gen.add_argument("--format", choices=("json", "table", "csv"), default=None)
    gen.add_argument("--variant", default=None, help="Secondary plan of the recipe, e.g. rho2")

    ver = commands.add_parser("verify", help="Verify a plan document")
    ver.add_argument("input", type=Path)
    ver.add_argument("--claim", action="append", default=None, help="Override the document's claims (repeatable)")
    ver.add_argument("--report", type=Path, default=None, help="Write the JSON report here")
    ver.add_argument("--golden", type=Path, default=None, help="Compare against a transcribed block table")

    oracle = commands.add_parser("oracle", help="Independent checks")
    kinds = oracle.add_subparsers(dest="kind", required=True)
    cyc = kinds.add_parser("cyclotomy", help="Brute-force vs closed-form cyclotomy numbers")
    cyc.add_argument("--q", type=int, required=True)
    oa_check = kinds.add_parser("oa-check", help="Check strength 2 of an array document")
    oa_check.add_argument("input", type=Path)
    recount = kinds.add_parser("recount", help="Recount incidence matrices of a plan document")
    recount.add_argument("input", type=Path)
    recount.add_argument("--pair", nargs=2, metavar="FACTOR", default=None, help="Only print N for this pair")
    build = kinds.add_parser("oa-build", help="Write an array document")
    source = build.add_mutually_exclusive_group(required=True)
    source.add_argument("--rao", nargs=2, type=int, metavar=("S", "N"))
    source.add_argument("--hadamard", type=int, metavar="N")
    build.add_argument("--augment", action="store_true", help="Q(N,m,s): prepend the zero column")
    build.add_argument("-o", "--output", type=Path, required=True)
    return parser.parse_args(argv)


def cmd_catalog(args: argparse.Namespace) -> int:
    recipes = [get_recipe(args.recipe_id)] if args.recipe_id else catalog()
    if args.json:
        print(json.dumps([r.describe() for r in recipes], indent=2))
        return EXIT_OK
    for recipe in recipes:
        info = recipe.describe()
        params = ", ".join(info["parameters"]) or "none"
        print(f"{info['id']}: {info['title']}")
        print(f"  parameters: {params}")
        print(f"  constraint: {info['constraint']}")
        print(f"  claims: {'; '.join(info['claims'])}")
        for preset in info["presets"]:
            values = ", ".join(f"{k}={v}" for k, v in preset["params"].items()) or "(default)"
            extra = f" -> {'; '.join(preset['claims'])}" if preset["claims"] else ""
            print(f"  preset: {values}{extra}")
    return EXIT_OK


def cmd_gen(args: argparse.Namespace, toolkit: PlanToolkit) -> int:
    params = {name: getattr(args, name) for name in RECIPE_PARAMS if getattr(args, name) is not None}
    document = toolkit.generate(args.recipe_id, params, args.variant)
    path = toolkit.write(document, args.output, args.format)
    print(f"{document.name}: m={document.plan.m} b={document.plan.b} k={document.plan.k} -> {path}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, toolkit: PlanToolkit) -> int:
    try:
        document = read_plan_document(args.input)
    except PlanShapeError as exc:
        raise PlanFormatError(f"{args.input}: {exc}") from None
    outcome = toolkit.verify(document, args.claim, args.golden)
    text = dumps(outcome.to_dict())
    if args.report:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for failed in outcome.report.failing_claims():
        print(f"claim failed: {failed.claim} ({failed.detail})", file=sys.stderr)
    return EXIT_OK if outcome.passed else EXIT_CLAIM_FAILED


def cmd_oracle(args: argparse.Namespace) -> int:
    if args.kind == "cyclotomy":
        f = field_new(args.q)
        t = cosets(f).t
        formula = cyclotomy_formula(t)
        agree = True
        print(f"q={f.q} t={t} alpha={f.alpha}")
        for pair in ((0, 0), (0, 1), (1, 0), (1, 1)):
            brute = cyclotomy_number(f, *pair)
            agree &= brute == formula[pair]
            print(f"({pair[0]},{pair[1]}) brute={brute} formula={formula[pair]}")
        return EXIT_OK if agree else EXIT_CLAIM_FAILED

    if args.kind == "oa-check":
        array = array_from_dict(load_json(args.input))
        if isinstance(array, HadamardMatrix):
            if not array.is_valid():
                print("fail: HH' != nI")
                return EXIT_CLAIM_FAILED
            array = q_from_hadamard(array)
        result = verify_strength2(array)
        if result:
            print(f"pass: OA({array.n_runs},{array.m_factors},{array.s},2)")
            return EXIT_OK
        print(f"fail: columns {result.pair} counts {None if result.counts is None else result.counts.tolist()}")
        return EXIT_CLAIM_FAILED

    if args.kind == "recount":
        try:
            plan = read_plan_document(args.input).plan
        except PlanShapeError as exc:
            raise PlanFormatError(f"{args.input}: {exc}") from None
        inc = recount_incidence(plan)
        labels = [[level_str(x) for x in sorted(plan.level_positions(i), key=plan.level_positions(i).get)] for i in range(plan.m)]
        if args.pair:
            pairs = [(plan.factor_index(args.pair[0]), plan.factor_index(args.pair[1]))]
        else:
            pairs = [(i, j) for i in range(plan.m) for j in range(i + 1, plan.m)]
        for i, j in pairs:
            print(f"N[{plan.names[i]},{plan.names[j]}]")
            print(format_matrix(inc.N[i][j], labels[i], labels[j]))
        if not args.pair:
            blocks = [f"B{j + 1}" for j in range(plan.b)]
            for i in range(plan.m):
                print(f"L[{plan.names[i]}]")
                print(format_matrix(inc.L[i], labels[i], blocks))
        return EXIT_OK

    if args.rao:
        array = oa_rao(*args.rao)
        name = f"OA(rao s={args.rao[0]} n={args.rao[1]})"
        if args.augment:
            array, name = q_augment(array), f"Q({name})"
    else:
        h = hadamard(args.hadamard)
        array = q_from_hadamard(h) if args.augment else h
        name = f"Q({h.n},{h.n},2)" if args.augment else f"H({h.n})"
    args.output.parent.mkdir(parents=True, exist_ok=True)
    args.output.write_text(dumps(array_to_dict(array, name)), encoding="utf-8")
    print(f"{name} -> {args.output}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    load_dotenv()
    try:
        env_config = os.getenv(CONFIG_ENV)
        if args.config is not None:
            config = load_config(args.config)
        elif env_config:
            config = load_config(Path(env_config))
        else:
            config = load_config(DEFAULT_CONFIG, explicit=False)
    except (OSError, yaml.YAMLError, PlanFormatError) as exc:
        print(f"error: cannot load config: {exc}", file=sys.stderr)
        return EXIT_IO
    configure_logging(config, args.log_level)
    toolkit = PlanToolkit(config)

    try:
        if args.command == "catalog":
            return cmd_catalog(args)
        if args.command == "gen":
            return cmd_gen(args, toolkit)
        if args.command == "verify":
            return cmd_verify(args, toolkit)
        return cmd_oracle(args)
    except (PlanFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PlanToolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT


if __name__ == "__main__":
    sys.exit(main())
