"""Compile source bundles and classify what the compilers did.

A :class:`ToolchainPlan` names one compiler per language. Mixed bundles are
compiled with the strategy each non-Java toolchain supports natively:

=================  ====================================================
languages          steps
=================  ====================================================
Java               javac
Kotlin (+Java)     kotlinc on .kt and .java, then javac against its output
Groovy (+Java)     groovyc in joint mode on everything
Scala (+Java)      scalac on .scala and .java, then javac against its output
=================  ====================================================

Any other mix raises :class:`UnsupportedLanguageMix`.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import shutil
import signal
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .ir import Lang
from .render import SourceBundle, SourceFile, write_bundle

PLACEHOLDERS = ("{sources}", "{classpath}", "{outDir}")

DEFAULT_CRASH_PATTERNS = (
    r"^\s+at [\w$.<>]+\(.*\)\s*$",
    r"(?i)internal (compiler )?error",
    r"Exception in thread",
    r"\b[\w.$]*(Exception|Error): ",
)


class ToolchainUnavailable(RuntimeError):
    pass


class UnsupportedLanguageMix(ValueError):
    pass


class Status(Enum):
    PASS = "PASS"
    REJECT = "REJECT"
    CRASH = "CRASH"
    TIMEOUT = "TIMEOUT"


class Mode(Enum):
    NORMAL = "NORMAL"
    DIFFERENTIAL = "DIFFERENTIAL"


class Result(Enum):
    OK = "OK"
    NORMAL_REJECT = "NORMAL_REJECT"
    DISCREPANCY = "DISCREPANCY"
    CRASH_FOUND = "CRASH_FOUND"
    INCONCLUSIVE = "INCONCLUSIVE"


FLAGGED = (Result.NORMAL_REJECT, Result.DISCREPANCY, Result.CRASH_FOUND)


# ---------------------------------------------------------------------------
# Fingerprints
# ---------------------------------------------------------------------------

_DIRS = re.compile(r"(?:[A-Za-z]:)?(?:[\w.\-$+~]*[/\\])+(?=[\w.\-$+])")
_POS = re.compile(r":\s*\d+(?::\d+)?\b")
_LINE = re.compile(r"\b(line|column|col)\s+\d+", re.I)
_DURATION = re.compile(r"\b\d+(?:\.\d+)?\s*(?:ms|s|sec|secs|seconds|minutes?)\b")
_IDENTS = (
    (re.compile(r"\b[AI]\d+\b"), "<type>"),
    (re.compile(r"\bfunc\d*\b"), "<method>"),
    (re.compile(r"\barg\d+\b"), "<param>"),
    (re.compile(r"\bT\d+\b"), "<tparam>"),
)
# a line that opens a new message: "File.kt:3:1: ...", "e: ...", "warning: ..."
_HEADER = re.compile(r"(?i)^(?:\S*\.(?:java|kt|groovy|scala):\s*\d+|[ew]:\s|error\b|warning\b|exception\b)")
_WARNING = re.compile(r"(?i)^w:\s|\bwarning\b")
_ERROR = re.compile(r"(?i)\berror\b|exception")
_SUMMARY = re.compile(r"(?i)^\d+\s+(?:errors?|warnings?)(?:\s+found)?$")


def _message_lines(text: str) -> list[str]:
    """Lines of error messages, with warnings and their continuations dropped."""
    out = []
    in_warning = False
    for line in text.splitlines():
        s = line.strip()
        if not s or _SUMMARY.match(s):
            continue
        if _HEADER.match(s):
            in_warning = bool(_WARNING.search(s)) and not _ERROR.search(s)
        if not in_warning:
            out.append(s)
    return out


def normalize_diagnostics(text: str) -> str:
    """Strip everything that varies between two reports of the same problem.

    Warnings (with their continuation lines) and error-count summaries are
    dropped. Directories, positions, durations and generated names are
    replaced by placeholders, then lines are sorted and deduplicated.
    """
    out = set()
    for line in _message_lines(text):
        line = _DIRS.sub("", line)
        line = _DURATION.sub("<duration>", line)
        line = _POS.sub(":<pos>", line)
        line = _LINE.sub(r"\1 <pos>", line)
        for pat, repl in _IDENTS:
            line = pat.sub(repl, line)
        out.add(" ".join(line.split()))
    return "\n".join(sorted(out))


def fingerprint(diagnostics: str) -> str:
    return hashlib.sha256(normalize_diagnostics(diagnostics).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Compiler specs and plans
# ---------------------------------------------------------------------------


def tool_env_var(compiler_id: str) -> str:
    return "XLANGFUZZ_TOOL_" + re.sub(r"\W", "_", compiler_id).upper()


@dataclass(frozen=True)
class CompilerSpec:
    id: str
    language: Lang
    invocation: tuple[str, ...]
    version: str = ""
    timeout_seconds: float = 60.0
    crash_patterns: tuple[str, ...] = DEFAULT_CRASH_PATTERNS
    env: Mapping[str, str] = field(default_factory=dict)

    def check(self) -> None:
        joined = " ".join(self.invocation)
        missing = [p for p in PLACEHOLDERS if p not in joined]
        if missing:
            raise ValueError(f"compiler {self.id}: invocation lacks {', '.join(missing)}")
        if self.timeout_seconds <= 0:
            raise ValueError(f"compiler {self.id}: timeout must be positive")

    def argv(self, sources: Sequence[str], classpath: str, out_dir: str) -> list[str]:
        argv: list[str] = []
        for tok in self.invocation:
            if tok == "{sources}":
                argv.extend(sources)
                continue
            argv.append(tok.replace("{classpath}", classpath or ".")
                        .replace("{outDir}", out_dir)
                        .replace("{python}", sys.executable))
        override = os.environ.get(tool_env_var(self.id))
        if override:
            argv[0] = override
        return argv

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "language": self.language.value,
            "invocation": list(self.invocation),
            "version": self.version,
            "timeoutSeconds": self.timeout_seconds,
            "crashPatterns": list(self.crash_patterns),
            "env": dict(self.env),
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "CompilerSpec":
        inv = d["invocation"]
        if isinstance(inv, str):
            inv = inv.split()
        return cls(
            id=d["id"],
            language=Lang(d["language"]),
            invocation=tuple(inv),
            version=d.get("version", ""),
            timeout_seconds=float(d.get("timeoutSeconds", 60.0)),
            crash_patterns=tuple(d.get("crashPatterns", DEFAULT_CRASH_PATTERNS)),
            env=dict(d.get("env", {})),
        )


@dataclass(frozen=True)
class ToolchainPlan:
    compilers: Mapping[Lang, CompilerSpec]

    @property
    def id(self) -> str:
        return "+".join(self.compilers[l].id for l in sorted(self.compilers, key=lambda l: l.value))

    def get(self, lang: Lang) -> CompilerSpec:
        try:
            return self.compilers[lang]
        except KeyError:
            raise ToolchainUnavailable(f"no {lang.value} compiler in plan {self.id}") from None

    def replacing(self, spec: CompilerSpec) -> "ToolchainPlan":
        return ToolchainPlan({**self.compilers, spec.language: spec})

    def varied_language(self, other: "ToolchainPlan") -> Lang | None:
        """The language whose compiler differs between the two plans, if any."""
        diff = [l for l in set(self.compilers) | set(other.compilers)
                if self.compilers.get(l) != other.compilers.get(l)]
        if len(diff) > 1:
            raise ValueError(f"plans {self.id} and {other.id} differ in {len(diff)} languages")
        return diff[0] if diff else None


# ---------------------------------------------------------------------------
# Outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompileOutcome:
    status: Status
    exit_code: int | None
    diagnostics: str
    duration_ms: int
    fingerprint: str
    compiler: str = ""

    def to_json(self, with_timing: bool = True) -> dict:
        d = {
            "compiler": self.compiler,
            "status": self.status.value,
            "exitCode": self.exit_code,
            "diagnostics": self.diagnostics,
            "fingerprint": self.fingerprint,
        }
        if with_timing:
            d["durationMs"] = self.duration_ms
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "CompileOutcome":
        return cls(Status(d["status"]), d["exitCode"], d["diagnostics"], d.get("durationMs", 0),
                   d["fingerprint"], d.get("compiler", ""))


@dataclass(frozen=True)
class TestVerdict:
    mode: Mode
    result: Result
    outcomes: tuple[CompileOutcome, ...]

    __test__ = False  # not a pytest class

    @property
    def flagged(self) -> bool:
        return self.result in FLAGGED

    @property
    def fingerprint(self) -> str:
        """Fingerprint of the side that failed; empty for unflagged verdicts."""
        if not self.flagged:
            return ""
        bad = [o for o in self.outcomes if o.status is not Status.PASS]
        crashed = [o for o in bad if o.status is Status.CRASH]
        return (crashed or bad)[0].fingerprint

    def to_json(self, with_timing: bool = True) -> dict:
        return {
            "mode": self.mode.value,
            "result": self.result.value,
            "fingerprint": self.fingerprint,
            "outcomes": [o.to_json(with_timing) for o in self.outcomes],
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "TestVerdict":
        return cls(Mode(d["mode"]), Result(d["result"]),
                   tuple(CompileOutcome.from_json(o) for o in d["outcomes"]))


def classify_normal(outcome: CompileOutcome) -> Result:
    return {
        Status.PASS: Result.OK,
        Status.REJECT: Result.NORMAL_REJECT,
        Status.CRASH: Result.CRASH_FOUND,
        Status.TIMEOUT: Result.INCONCLUSIVE,
    }[outcome.status]


def classify_differential(a: CompileOutcome, b: CompileOutcome) -> Result:
    statuses = {a.status, b.status}
    if Status.TIMEOUT in statuses:
        return Result.INCONCLUSIVE
    if Status.CRASH in statuses:
        return Result.CRASH_FOUND
    if (a.status is Status.PASS) != (b.status is Status.PASS):
        return Result.DISCREPANCY
    return Result.OK


# ---------------------------------------------------------------------------
# Running compilers
# ---------------------------------------------------------------------------


@dataclass
class _Run:
    exit_code: int | None
    output: str
    duration_ms: int
    timed_out: bool


def _run(argv: list[str], cwd: Path, timeout: float, env: Mapping[str, str]) -> _Run:
    if shutil.which(argv[0]) is None:
        raise ToolchainUnavailable(f"{argv[0]} not found")
    full_env = {**os.environ, **env}
    start = time.monotonic()
    # own session so a timeout can kill the whole process group
    proc = subprocess.Popen(argv, cwd=cwd, env=full_env, stdout=subprocess.PIPE,
                            stderr=subprocess.STDOUT, start_new_session=True)
    try:
        out, _ = proc.communicate(timeout=timeout)
        timed_out = False
    except subprocess.TimeoutExpired:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        out, _ = proc.communicate()
        timed_out = True
    ms = int((time.monotonic() - start) * 1000)
    return _Run(None if timed_out else proc.returncode, out.decode(errors="replace"), ms, timed_out)


def _status(run: _Run, spec: CompilerSpec) -> Status:
    if run.timed_out:
        return Status.TIMEOUT
    if run.exit_code == 0:
        return Status.PASS
    if any(re.search(p, run.output, re.M) for p in spec.crash_patterns):
        return Status.CRASH
    return Status.REJECT


def compilation_steps(bundle: SourceBundle, plan: ToolchainPlan) -> list[tuple[CompilerSpec, list[SourceFile], bool]]:
    """``(compiler, files, uses_previous_output)`` for each step of the strategy."""
    langs = bundle.languages()
    others = langs - {Lang.JAVA}
    if len(others) > 1:
        raise UnsupportedLanguageMix(", ".join(sorted(l.value for l in langs)))
    java = bundle.by_lang(Lang.JAVA)
    if not others:
        return [(plan.get(Lang.JAVA), java, False)] if java else []
    (lang,) = others
    first = (plan.get(lang), bundle.by_lang(lang, Lang.JAVA), False)
    if lang is Lang.GROOVY or not java:
        return [first]
    return [first, (plan.get(Lang.JAVA), java, True)]


def compile_bundle(bundle: SourceBundle, plan: ToolchainPlan, workdir: Path | None = None) -> CompileOutcome:
    """Compile ``bundle`` under ``plan`` in ``workdir`` (wiped first).

    Steps stop at the first failure; the outcome carries the concatenated
    output of every step that ran.
    """
    steps = compilation_steps(bundle, plan)
    if workdir is None:
        with tempfile.TemporaryDirectory(prefix="xlangfuzz-") as tmp:
            return _compile(steps, bundle, plan, Path(tmp))
    workdir = Path(workdir)
    if workdir.exists():
        shutil.rmtree(workdir)
    workdir.mkdir(parents=True)
    return _compile(steps, bundle, plan, workdir)


def _compile(steps, bundle: SourceBundle, plan: ToolchainPlan, workdir: Path) -> CompileOutcome:
    write_bundle(bundle, workdir)
    src = workdir / "src"
    outputs: list[str] = []
    total_ms = 0
    status = Status.PASS
    exit_code: int | None = 0
    prev_out = ""
    for i, (spec, files, chained) in enumerate(steps):
        out_dir = workdir / f"out{i}-{spec.id}"
        out_dir.mkdir()
        argv = spec.argv([str(src / f.path) for f in files], prev_out if chained else "", str(out_dir))
        run = _run(argv, workdir, spec.timeout_seconds, spec.env)
        total_ms += run.duration_ms
        outputs.append(run.output)
        exit_code = run.exit_code
        status = _status(run, spec)
        prev_out = str(out_dir)
        if status is not Status.PASS:
            break
    text = "".join(outputs)
    return CompileOutcome(status, exit_code, text, total_ms, fingerprint(text), plan.id)


def normal_test(bundle: SourceBundle, plan: ToolchainPlan, workdir: Path | None = None) -> TestVerdict:
    outcome = compile_bundle(bundle, plan, workdir)
    return TestVerdict(Mode.NORMAL, classify_normal(outcome), (outcome,))


def differential_test(bundle: SourceBundle, pair: tuple[ToolchainPlan, ToolchainPlan],
                      workdir: Path | None = None) -> TestVerdict:
    a, b = pair
    a.varied_language(b)
    wa = wb = None
    if workdir is not None:
        wa, wb = Path(workdir) / a.id, Path(workdir) / b.id
        if a.id == b.id:
            wa, wb = Path(workdir) / "left", Path(workdir) / "right"
    oa = compile_bundle(bundle, a, wa)
    ob = compile_bundle(bundle, b, wb)
    return TestVerdict(Mode.DIFFERENTIAL, classify_differential(oa, ob), (oa, ob))


# ---------------------------------------------------------------------------
# Toolchain config
# ---------------------------------------------------------------------------


def load_compilers(items: Iterable[Mapping]) -> dict[str, CompilerSpec]:
    specs: dict[str, CompilerSpec] = {}
    for d in items:
        spec = CompilerSpec.from_json(d)
        spec.check()
        if spec.id in specs:
            raise ValueError(f"compiler id {spec.id} defined twice")
        specs[spec.id] = spec
    return specs


def mock_compiler(id: str, language: Lang, rules: Path | str, version: str = "",
                  timeout_seconds: float = 60.0) -> CompilerSpec:
    """A :mod:`xlangfuzz.mockc` compiler driven by the rule file ``rules``."""
    return CompilerSpec(
        id=id,
        language=language,
        invocation=("{python}", "-m", "xlangfuzz.mockc", "--rules", str(rules),
                    "--cp", "{classpath}", "--out", "{outDir}", "{sources}"),
        version=version,
        timeout_seconds=timeout_seconds,
    )


def save_verdict(verdict: TestVerdict, path: Path) -> None:
    Path(path).write_text(json.dumps(verdict.to_json(), indent=2) + "\n")
