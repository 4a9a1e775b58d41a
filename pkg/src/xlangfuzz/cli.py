"""Command-line driver.

Exit codes: 0 when everything ran and nothing was flagged, 10 when findings
(or a flagged verdict) were produced, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .campaign import CampaignConfig, gen_config_from_json, report, report_markdown, run_campaign
from .generator import ConfigError, GenConfig, Rng, derive_seed, generate_ir_program
from .harness import FLAGGED, differential_test, normal_test
from .ir import IrProgram, Lang, from_json, record_to_json, to_json
from .minimizer import bundle_oracle, minimize, write_result
from .mutators import ALL_MUTATORS, DEFAULT_MUTATORS, MUTATORS, mutate
from .render import RenderOptions, render, write_bundle

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FINDINGS = 10


def _load_program(path: str) -> IrProgram:
    try:
        return from_json(Path(path).read_text())
    except (OSError, ValueError, KeyError) as e:
        raise ConfigError(f"cannot read program {path}: {e}") from e


def _gen_config(args) -> GenConfig:
    if args.config:
        cfg = CampaignConfig.load(Path(args.config)).gen_config
    elif getattr(args, "gen_config", None):
        cfg = gen_config_from_json(json.loads(Path(args.gen_config).read_text()))
    else:
        cfg = GenConfig()
    if args.languages:
        cfg = GenConfig(**{**cfg.__dict__, "languages": tuple(Lang(l) for l in args.languages.split(","))})
        cfg.check()
    return cfg


def cmd_generate(args) -> int:
    cfg = _gen_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        seed = derive_seed(args.seed, i) if args.count > 1 else args.seed
        program = generate_ir_program(cfg.with_seed(seed))
        d = out / f"p{i:04d}"
        d.mkdir(exist_ok=True)
        (d / "program.json").write_text(to_json(program))
        if args.render:
            write_bundle(render(program, _render_options(args)), d)
        print(d / "program.json")
    return EXIT_OK


def _render_options(args) -> RenderOptions:
    return RenderOptions(kotlin_nullable=not getattr(args, "kotlin_non_null", False))


def cmd_render(args) -> int:
    program = _load_program(args.program)
    bundle = render(program, _render_options(args))
    if args.out:
        write_bundle(bundle, Path(args.out))
    else:
        for f in bundle.files:
            print(f"// FILE: {f.path}")
            print(f.text, end="")
    return EXIT_OK


def cmd_mutate(args) -> int:
    program = _load_program(args.program)
    enabled = tuple(args.mutators.split(",")) if args.mutators else DEFAULT_MUTATORS
    for m in enabled:
        if m not in MUTATORS:
            raise ConfigError(f"unknown mutator {m}; choose from {', '.join(ALL_MUTATORS)}")
    langs = tuple(Lang(l) for l in args.languages.split(",")) if args.languages else (Lang.JAVA, Lang.KOTLIN)
    mutant, rec = mutate(program, Rng(args.seed), enabled, langs)
    text = to_json(mutant)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(json.dumps(record_to_json(rec)), file=sys.stderr)
    return EXIT_OK


def _oracle_plans(cfg: CampaignConfig, args):
    if args.mode == "normal":
        plan = cfg.latest_plan()
        return lambda b, w=None: normal_test(b, plan, w)
    pairs = cfg.pairs()
    if not pairs:
        raise ConfigError("config defines no differential pairs")
    if not 0 <= args.pair < len(pairs):
        raise ConfigError(f"pair index {args.pair} out of range")
    plans = pairs[args.pair][1]
    return lambda b, w=None: differential_test(b, plans, w)


def cmd_test(args) -> int:
    cfg = CampaignConfig.load(Path(args.config))
    program = _load_program(args.program)
    test = _oracle_plans(cfg, args)
    verdict = test(render(program, cfg.render_options))
    print(json.dumps(verdict.to_json(), indent=2))
    return EXIT_FINDINGS if verdict.result in FLAGGED else EXIT_OK


def cmd_minimize(args) -> int:
    cfg = CampaignConfig.load(Path(args.config))
    program = _load_program(args.program)
    test = _oracle_plans(cfg, args)
    result = minimize(program, bundle_oracle(test, cfg.render_options), args.budget,
                      explore_reorder=args.explore_reorder)
    out = write_result(result, Path(args.out), cfg.render_options)
    print((out / "report.md").read_text(), end="")
    return EXIT_FINDINGS


def cmd_campaign(args) -> int:
    cfg = CampaignConfig.load(Path(args.config))
    overrides = {}
    if args.seed is not None:
        overrides["campaign_seed"] = args.seed
    if args.max_programs is not None:
        overrides["max_programs"] = args.max_programs
    if args.output_dir is not None:
        overrides["output_dir"] = Path(args.output_dir)
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.no_minimize:
        overrides["minimize"] = False
    if overrides:
        cfg = CampaignConfig(**{**cfg.__dict__, **overrides})
        cfg.check()
    summary = run_campaign(cfg)
    print(json.dumps(summary.to_json(), indent=2))
    if summary.findings:
        report(cfg.output_dir)
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_report(args) -> int:
    store = Path(args.store)
    if not (store / "findings.json").exists():
        raise ConfigError(f"{store} is not a campaign store")
    rep = report(store)
    print(report_markdown(rep), end="")
    return EXIT_FINDINGS if rep["uniqueFindings"] else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xlangfuzz", description="Cross-language JVM compiler fuzzer")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate IR programs")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--out", default="corpus")
    g.add_argument("--config", help="campaign config whose genConfig to use")
    g.add_argument("--gen-config", help="JSON file holding just a genConfig object")
    g.add_argument("--languages", help="comma list, e.g. JAVA,KOTLIN")
    g.add_argument("--render", action="store_true", help="also write sources")
    g.add_argument("--kotlin-non-null", action="store_true")
    g.set_defaults(fn=cmd_generate)

    r = sub.add_parser("render", help="render a program to source files")
    r.add_argument("program")
    r.add_argument("--out")
    r.add_argument("--kotlin-non-null", action="store_true")
    r.set_defaults(fn=cmd_render)

    m = sub.add_parser("mutate", help="apply one random mutation")
    m.add_argument("program")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--mutators", help=f"comma list from {','.join(ALL_MUTATORS)}")
    m.add_argument("--languages")
    m.add_argument("--out")
    m.set_defaults(fn=cmd_mutate)

    for name, fn, helptext in (("test", cmd_test, "compile a program and classify the outcome"),
                               ("minimize", cmd_minimize, "reduce a trigger program")):
        t = sub.add_parser(name, help=helptext)
        t.add_argument("program")
        t.add_argument("--config", required=True)
        t.add_argument("--mode", choices=("normal", "differential"), default="differential")
        t.add_argument("--pair", type=int, default=0, help="index into differentialPairs")
        if name == "minimize":
            t.add_argument("--budget", type=int, default=300)
            t.add_argument("--out", default="minimized")
            t.add_argument("--explore-reorder", action="store_true")
        t.set_defaults(fn=fn)

    c = sub.add_parser("campaign", help="run a full campaign")
    c.add_argument("--config", required=True)
    c.add_argument("--seed", type=int)
    c.add_argument("--max-programs", type=int)
    c.add_argument("--output-dir")
    c.add_argument("--workers", type=int)
    c.add_argument("--no-minimize", action="store_true")
    c.set_defaults(fn=cmd_campaign)

    rp = sub.add_parser("report", help="summarize a campaign store")
    rp.add_argument("store")
    rp.set_defaults(fn=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"xlangfuzz: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
