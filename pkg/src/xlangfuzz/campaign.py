"""Fuzzing campaigns: generate, test, mutate, deduplicate, minimize, report.

A campaign is driven by a JSON config (see :class:`CampaignConfig`). Every
program is generated from a seed derived from the campaign seed and its
index, so programs are independent of one another and of worker scheduling.
All files except the compiler work directories are deterministic for a
given config: no timestamps or durations are written to the store.

Store layout under ``outputDir``::

    corpus/<programId>/program.json, bundle.json, src/...
    findings/<findingId>/program.json, verdict.json, finding.json, src/...
    minimized/<findingId>/...
    runs/<runId>/<programId>/<compilerId>/      (compiler work dirs)
    findings.json, summary.json
"""

from __future__ import annotations

import json
import logging
import shutil
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .generator import ConfigError, GenConfig, Rng, derive_seed, generate_ir_program
from .harness import (
    FLAGGED,
    CompilerSpec,
    TestVerdict,
    ToolchainPlan,
    ToolchainUnavailable,
    UnsupportedLanguageMix,
    differential_test,
    load_compilers,
    normal_test,
)
from .ir import (
    IrProgram,
    Lang,
    MutationRecord,
    from_json,
    inheritance_depth,
    inheritance_width,
    is_cross_language,
    is_generic,
    record_from_json,
    record_to_json,
    to_json,
)
from .minimizer import MinimizationResult, bundle_oracle, minimize, write_result
from .mutators import ALL_MUTATORS, DEFAULT_MUTATORS, MUTATOR_LABELS, NoMutationPossible, mutate
from .render import RenderOptions, render, write_bundle
from .validation import validate

log = logging.getLogger(__name__)

GENERATION = "Generation"
MINIMIZATION = "Minimization"
ATTRIBUTION_ROWS = (GENERATION, *(MUTATOR_LABELS[m] for m in ALL_MUTATORS), MINIMIZATION)

_GEN_KEYS = {
    "declCountRange": "decl_count_range",
    "parentClassProb": "parent_class_prob",
    "interfaceCountRange": "interface_count_range",
    "typeParamCountRange": "type_param_count_range",
    "methodCountRange": "method_count_range",
    "paramCountRange": "param_count_range",
    "canOverrideProb": "can_override_prob",
    "interfaceRatio": "interface_ratio",
    "languages": "languages",
    "abstractClassExemption": "abstract_class_exemption",
    "maxRetries": "max_retries",
}


def gen_config_from_json(d: Mapping[str, Any]) -> GenConfig:
    unknown = set(d) - set(_GEN_KEYS)
    if unknown:
        raise ConfigError(f"unknown genConfig keys: {', '.join(sorted(unknown))}")
    kwargs: dict[str, Any] = {}
    for key, attr in _GEN_KEYS.items():
        if key not in d:
            continue
        v = d[key]
        if key == "languages":
            v = tuple(Lang(x) for x in v)
        elif key.endswith("Range"):
            v = tuple(v)
        kwargs[attr] = v
    cfg = GenConfig(**kwargs)
    cfg.check()
    return cfg


def gen_config_to_json(cfg: GenConfig) -> dict:
    out = {}
    for key, attr in _GEN_KEYS.items():
        v = getattr(cfg, attr)
        if key == "languages":
            v = [l.value for l in v]
        elif isinstance(v, tuple):
            v = list(v)
        out[key] = v
    return out


@dataclass(frozen=True)
class PairSpec:
    language: Lang
    earlier: str


@dataclass(frozen=True)
class CampaignConfig:
    gen_config: GenConfig = GenConfig()
    enabled_mutators: tuple[str, ...] = DEFAULT_MUTATORS
    mutants_per_program: int = 4
    toolchains: Mapping[str, CompilerSpec] = field(default_factory=dict)
    latest: Mapping[Lang, str] = field(default_factory=dict)
    differential_pairs: tuple[PairSpec, ...] = ()
    output_dir: Path = Path("campaign-out")
    campaign_seed: int = 0
    max_programs: int = 10
    workers: int = 1
    minimize: bool = True
    minimize_budget: int = 300
    render_options: RenderOptions = RenderOptions()

    def check(self) -> None:
        for m in self.enabled_mutators:
            if m not in ALL_MUTATORS:
                raise ConfigError(f"unknown mutator {m}")
        if self.mutants_per_program < 0 or self.max_programs < 0 or self.workers < 1:
            raise ConfigError("counts must be non-negative and workers at least 1")
        for lang, cid in self.latest.items():
            spec = self.toolchains.get(cid)
            if spec is None:
                raise ConfigError(f"latest compiler {cid} is not defined")
            if spec.language is not lang:
                raise ConfigError(f"compiler {cid} is {spec.language.value}, listed for {lang.value}")
        if Lang.JAVA not in self.latest and self.toolchains:
            raise ConfigError("a latest JAVA compiler is required")
        for pair in self.differential_pairs:
            spec = self.toolchains.get(pair.earlier)
            if spec is None:
                raise ConfigError(f"pair compiler {pair.earlier} is not defined")
            if spec.language is not pair.language:
                raise ConfigError(f"pair compiler {pair.earlier} is not a {pair.language.value} compiler")
            if self.latest.get(pair.language) == pair.earlier:
                raise ConfigError(f"pair for {pair.language.value} does not vary the compiler")
            if pair.language not in self.latest:
                raise ConfigError(f"no latest {pair.language.value} compiler to pair with")

    @property
    def run_id(self) -> str:
        return f"run-{self.campaign_seed:016x}"

    def latest_plan(self) -> ToolchainPlan:
        return ToolchainPlan({lang: self.toolchains[cid] for lang, cid in self.latest.items()})

    def pairs(self) -> list[tuple[PairSpec, tuple[ToolchainPlan, ToolchainPlan]]]:
        latest = self.latest_plan()
        return [(p, (latest, latest.replacing(self.toolchains[p.earlier]))) for p in self.differential_pairs]

    @classmethod
    def from_json(cls, d: Mapping[str, Any], base_dir: Path | None = None) -> "CampaignConfig":
        """Build a config; ``{configDir}`` in compiler invocations expands to ``base_dir``."""
        base = Path(base_dir) if base_dir else Path(".")
        try:
            items = []
            for c in d.get("toolchains", []):
                c = dict(c)
                inv = c["invocation"]
                if isinstance(inv, str):
                    inv = inv.split()
                c["invocation"] = [t.replace("{configDir}", str(base)) for t in inv]
                items.append(c)
            toolchains = load_compilers(items)
            out = Path(d.get("outputDir", "campaign-out"))
            cfg = cls(
                gen_config=gen_config_from_json(d.get("genConfig", {})),
                enabled_mutators=tuple(d.get("enabledMutators", DEFAULT_MUTATORS)),
                mutants_per_program=int(d.get("mutantsPerProgram", 4)),
                toolchains=toolchains,
                latest={Lang(k): v for k, v in d.get("latest", {}).items()},
                differential_pairs=tuple(PairSpec(Lang(p["language"]), p["earlier"])
                                         for p in d.get("differentialPairs", [])),
                output_dir=out if out.is_absolute() else base / out,
                campaign_seed=int(d.get("campaignSeed", 0)),
                max_programs=int(d.get("maxPrograms", 10)),
                workers=int(d.get("workers", 1)),
                minimize=bool(d.get("minimize", True)),
                minimize_budget=int(d.get("minimizeBudget", 300)),
                render_options=RenderOptions(bool(d.get("kotlinNullable", True))),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"bad campaign config: {e}") from e
        cfg.check()
        return cfg

    @classmethod
    def load(cls, path: Path) -> "CampaignConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read {path}: {e}") from e
        return cls.from_json(data, path.parent.resolve())


# ---------------------------------------------------------------------------
# Findings
# ---------------------------------------------------------------------------


def program_metrics(program: IrProgram) -> dict:
    return {
        "crossLanguage": is_cross_language(program),
        "genericsRelated": is_generic(program),
        "depth": inheritance_depth(program),
        "width": inheritance_width(program),
    }


@dataclass
class Finding:
    id: str
    program: IrProgram
    verdict: TestVerdict
    fingerprint: str
    attribution: str
    origin: str
    pair: str = ""
    mutation_trail: tuple[MutationRecord, ...] = ()
    status: str = "NEW"
    bundle_ref: str = ""
    minimized: IrProgram | None = None
    duplicate_of: str | None = None

    @property
    def trigger_program(self) -> IrProgram:
        return self.minimized if self.minimized is not None else self.program

    @property
    def metrics(self) -> dict:
        return program_metrics(self.trigger_program)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "origin": self.origin,
            "pair": self.pair,
            "result": self.verdict.result.value,
            "fingerprint": self.fingerprint,
            "status": self.status,
            "duplicateOf": self.duplicate_of,
            "attribution": self.attribution,
            "metrics": self.metrics,
            "mutationTrail": [record_to_json(r) for r in self.mutation_trail],
            "bundleRef": self.bundle_ref,
        }


@dataclass
class CampaignSummary:
    run_id: str
    campaign_seed: int
    programs: int = 0
    mutants: int = 0
    normal: Counter = field(default_factory=Counter)
    differential: Counter = field(default_factory=Counter)
    errors: Counter = field(default_factory=Counter)
    findings: list[Finding] = field(default_factory=list)

    def to_json(self) -> dict:
        status = Counter(f.status for f in self.findings)
        return {
            "runId": self.run_id,
            "campaignSeed": self.campaign_seed,
            "programs": self.programs,
            "mutants": self.mutants,
            "normalTests": dict(sorted(self.normal.items())),
            "differentialTests": dict(sorted(self.differential.items())),
            "errors": dict(sorted(self.errors.items())),
            "findings": {
                "total": len(self.findings),
                "new": status["NEW"],
                "minimized": status["MINIMIZED"],
                "duplicate": status["DUPLICATE"],
            },
            "findingIds": [f.id for f in self.findings],
            "fingerprints": sorted({f.fingerprint for f in self.findings}),
        }

    @property
    def unique_findings(self) -> list[Finding]:
        return [f for f in self.findings if f.status != "DUPLICATE"]


# ---------------------------------------------------------------------------
# Campaign loop
# ---------------------------------------------------------------------------


@dataclass
class _Flag:
    program: IrProgram
    verdict: TestVerdict
    attribution: str
    origin: str
    pair: str = ""


@dataclass
class _ProgramResult:
    index: int
    program: IrProgram
    normal: str | None = None
    differential: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    mutants: int = 0
    flags: list[_Flag] = field(default_factory=list)


def _applicable(pair: PairSpec, program: IrProgram) -> bool:
    return pair.language is Lang.JAVA or pair.language in program.languages()


def _process_program(cfg: CampaignConfig, index: int) -> _ProgramResult:
    seed = derive_seed(cfg.campaign_seed, index)
    program = generate_ir_program(cfg.gen_config.with_seed(seed))
    problems = validate(program)
    if problems:
        # the generator asserts validity; a violation here is a generator bug
        raise AssertionError(f"generated program {index} invalid: {problems[0]}")
    res = _ProgramResult(index, program)
    pid = f"p{index:04d}"
    runs = cfg.output_dir / "runs" / cfg.run_id / pid
    bundle = render(program, cfg.render_options)

    if cfg.latest:
        try:
            v = normal_test(bundle, cfg.latest_plan(), runs / "normal")
            res.normal = v.result.value
            if v.result in FLAGGED:
                res.flags.append(_Flag(program, v, GENERATION, f"{pid}/normal"))
        except (ToolchainUnavailable, UnsupportedLanguageMix) as e:
            res.errors.append(type(e).__name__)

    baseline: dict[str, TestVerdict] = {}
    pairs = [(spec, plans) for spec, plans in cfg.pairs() if _applicable(spec, program)]
    for spec, plans in pairs:
        pair_id = f"{spec.language.value}:{spec.earlier}"
        try:
            v = differential_test(bundle, plans, runs / "base" / spec.earlier)
        except (ToolchainUnavailable, UnsupportedLanguageMix) as e:
            res.errors.append(type(e).__name__)
            continue
        baseline[pair_id] = v
        res.differential.append(v.result.value)
        if v.result in FLAGGED:
            res.flags.append(_Flag(program, v, GENERATION, f"{pid}/base", pair_id))

    rng = Rng(derive_seed(seed, 1))
    langs = cfg.gen_config.languages
    for k in range(cfg.mutants_per_program):
        try:
            mutant, rec = mutate(program, rng, cfg.enabled_mutators, langs)
        except NoMutationPossible:
            res.errors.append("NoMutationPossible")
            continue
        res.mutants += 1
        mbundle = render(mutant, cfg.render_options)
        for spec, plans in cfg.pairs():
            if not _applicable(spec, mutant):
                continue
            pair_id = f"{spec.language.value}:{spec.earlier}"
            try:
                v = differential_test(mbundle, plans, runs / f"m{k}" / spec.earlier)
            except (ToolchainUnavailable, UnsupportedLanguageMix) as e:
                res.errors.append(type(e).__name__)
                continue
            res.differential.append(v.result.value)
            if v.result not in FLAGGED:
                continue
            before = baseline.get(pair_id)
            # credit the mutator only if the unmutated program was not already flagged the same way
            same_before = before is not None and before.result is v.result and before.fingerprint == v.fingerprint
            who = GENERATION if same_before else MUTATOR_LABELS[rec.mutator]
            res.flags.append(_Flag(mutant, v, who, f"{pid}/m{k}", pair_id))
    return res


def _pair_plans(cfg: CampaignConfig, pair_id: str) -> tuple[ToolchainPlan, ToolchainPlan] | None:
    for spec, plans in cfg.pairs():
        if f"{spec.language.value}:{spec.earlier}" == pair_id:
            return plans
    return None


def _oracle_for(cfg: CampaignConfig, finding: Finding, workdir: Path):
    if finding.pair:
        plans = _pair_plans(cfg, finding.pair)
        return bundle_oracle(lambda b: differential_test(b, plans, workdir), cfg.render_options)
    plan = cfg.latest_plan()
    return bundle_oracle(lambda b: normal_test(b, plan, workdir), cfg.render_options)


class Store:
    """Writes campaign artifacts; all writes go through one instance."""

    def __init__(self, root: Path, options: RenderOptions = RenderOptions()):
        self.root = Path(root)
        self.options = options

    def reset(self) -> None:
        for sub in ("corpus", "findings", "minimized", "runs"):
            shutil.rmtree(self.root / sub, ignore_errors=True)
        self.root.mkdir(parents=True, exist_ok=True)

    def write_program(self, pid: str, program: IrProgram) -> Path:
        d = self.root / "corpus" / pid
        write_bundle(render(program, self.options), d)
        (d / "program.json").write_text(to_json(program))
        return d

    def write_finding(self, f: Finding) -> None:
        d = self.root / "findings" / f.id
        write_bundle(render(f.program, self.options), d)
        (d / "program.json").write_text(to_json(f.program))
        (d / "verdict.json").write_text(json.dumps(f.verdict.to_json(with_timing=False), indent=2) + "\n")
        (d / "finding.json").write_text(json.dumps(f.to_json(), indent=2) + "\n")

    def write_minimized(self, f: Finding, result: MinimizationResult) -> None:
        write_result(result, self.root / "minimized" / f.id, self.options)

    def write_index(self, summary: CampaignSummary) -> None:
        (self.root / "findings.json").write_text(
            json.dumps([f.to_json() for f in summary.findings], indent=2) + "\n")
        (self.root / "summary.json").write_text(json.dumps(summary.to_json(), indent=2) + "\n")


def run_campaign(cfg: CampaignConfig) -> CampaignSummary:
    cfg.check()
    store = Store(cfg.output_dir, cfg.render_options)
    store.reset()
    summary = CampaignSummary(cfg.run_id, cfg.campaign_seed)

    indices = range(cfg.max_programs)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(lambda i: _process_program(cfg, i), indices))
    else:
        results = [_process_program(cfg, i) for i in indices]

    seen: dict[str, str] = {}
    queue: list[Finding] = []

    def add(flag: _Flag, trail: tuple[MutationRecord, ...]) -> Finding:
        fid = f"F{len(summary.findings) + 1:04d}"
        fp = flag.verdict.fingerprint
        f = Finding(fid, flag.program, flag.verdict, fp, flag.attribution, flag.origin, flag.pair, trail,
                    bundle_ref=f"findings/{fid}")
        if fp in seen:
            f.status, f.duplicate_of = "DUPLICATE", seen[fp]
        else:
            seen[fp] = fid
            queue.append(f)
        summary.findings.append(f)
        return f

    for res in sorted(results, key=lambda r: r.index):
        summary.programs += 1
        summary.mutants += res.mutants
        store.write_program(f"p{res.index:04d}", res.program)
        if res.normal:
            summary.normal[res.normal] += 1
        summary.differential.update(res.differential)
        summary.errors.update(res.errors)
        for flag in res.flags:
            add(flag, flag.program.provenance)

    # minimize new findings in order; forks join the queue as new findings
    while queue:
        f = queue.pop(0)
        if not cfg.minimize:
            continue
        work = cfg.output_dir / "runs" / cfg.run_id / "minimize" / f.id
        try:
            result = minimize(f.program, _oracle_for(cfg, f, work), cfg.minimize_budget,
                              expected=f.verdict)
        except Exception as e:  # an unreproducible finding stays NEW
            log.warning("minimization of %s failed: %s", f.id, e)
            summary.errors[type(e).__name__] += 1
            continue
        f.minimized = result.minimized
        f.status = "MINIMIZED"
        store.write_minimized(f, result)
        for fork in result.forked_findings:
            add(_Flag(fork.program, fork.verdict, MINIMIZATION, f"{f.id}/fork", f.pair), f.mutation_trail)

    for f in summary.findings:
        store.write_finding(f)
    store.write_index(summary)
    return summary


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FindingRow:
    id: str
    result: str
    fingerprint: str
    attribution: str
    cross_language: bool
    generics_related: bool
    depth: int
    width: int
    status: str = "NEW"


def _mean(xs: Sequence[float]) -> float:
    return round(sum(xs) / len(xs), 2) if xs else 0.0


def characteristics(rows: Sequence[FindingRow]) -> dict:
    """Counts and averages over trigger programs, one column per property."""
    return {
        "Cross-Language": sum(r.cross_language for r in rows),
        "Single-Language": sum(not r.cross_language for r in rows),
        "Generic Related": sum(r.generics_related for r in rows),
        "depth": _mean([r.depth for r in rows]),
        "width": _mean([r.width for r in rows]),
    }


def attribution(rows: Sequence[FindingRow]) -> dict:
    c = Counter(r.attribution for r in rows)
    return {k: c.get(k, 0) for k in ATTRIBUTION_ROWS}


def build_report(rows: Sequence[FindingRow]) -> dict:
    unique = [r for r in rows if r.status != "DUPLICATE"]
    return {
        "findings": [r.__dict__ for r in rows],
        "characteristics": characteristics(unique),
        "attribution": attribution(unique),
        "uniqueFindings": len(unique),
        "duplicates": len(rows) - len(unique),
    }


def report_markdown(rep: dict) -> str:
    ch = rep["characteristics"]
    lines = [
        "# Campaign report",
        "",
        f"{rep['uniqueFindings']} unique findings, {rep['duplicates']} duplicates.",
        "",
        "## Trigger program characteristics",
        "",
        "| " + " | ".join(ch) + " |",
        "|" + "---|" * len(ch),
        "| " + " | ".join(f"{v:.2f}" if isinstance(v, float) else str(v) for v in ch.values()) + " |",
        "",
        "## Findings by mutator and process",
        "",
        "| Source | Findings |",
        "|---|---|",
        *[f"| {k} | {v} |" for k, v in rep["attribution"].items()],
        "",
        "## Findings",
        "",
        "| Id | Result | Status | Source | Cross-language | Generic | Depth | Width | Fingerprint |",
        "|---|---|---|---|---|---|---|---|---|",
    ]
    for r in rep["findings"]:
        lines.append(
            f"| {r['id']} | {r['result']} | {r['status']} | {r['attribution']} | "
            f"{'yes' if r['cross_language'] else 'no'} | {'yes' if r['generics_related'] else 'no'} | "
            f"{r['depth']} | {r['width']} | `{r['fingerprint']}` |")
    return "\n".join(lines) + "\n"


def load_rows(store: Path) -> list[FindingRow]:
    data = json.loads((Path(store) / "findings.json").read_text())
    return [
        FindingRow(d["id"], d["result"], d["fingerprint"], d["attribution"], d["metrics"]["crossLanguage"],
                   d["metrics"]["genericsRelated"], d["metrics"]["depth"], d["metrics"]["width"], d["status"])
        for d in data
    ]


def report(store: Path) -> dict:
    """Write ``report.json`` and ``report.md`` for a campaign store."""
    store = Path(store)
    rep = build_report(load_rows(store))
    (store / "report.json").write_text(json.dumps(rep, indent=2) + "\n")
    (store / "report.md").write_text(report_markdown(rep))
    return rep


def load_finding_program(store: Path, finding_id: str) -> IrProgram:
    return from_json((Path(store) / "findings" / finding_id / "program.json").read_text())


def rerender_matches(store: Path, finding_id: str, options: RenderOptions = RenderOptions()) -> bool:
    """Whether a stored finding's sources re-render byte-identically from its IR."""
    d = Path(store) / "findings" / finding_id
    program = from_json((d / "program.json").read_text())
    data = json.loads((d / "finding.json").read_text())
    trail = [record_from_json(r) for r in data["mutationTrail"]]
    if tuple(trail) != program.provenance:
        return False
    return all((d / "src" / f.path).read_text() == f.text for f in render(program, options).files)


__all__ = [
    "CampaignConfig", "CampaignSummary", "Finding", "FindingRow", "PairSpec", "Store", "attribution",
    "build_report", "characteristics", "gen_config_from_json", "gen_config_to_json", "load_rows",
    "program_metrics", "report", "report_markdown", "rerender_matches", "run_campaign",
]
