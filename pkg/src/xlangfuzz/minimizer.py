"""Reduce a trigger program while it keeps triggering the same problem.

Reduction passes are tried in a fixed priority order. A change is kept when
the oracle still reports the same verdict class and fingerprint, and rolled
back otherwise; after every kept change the search restarts from the highest
priority pass. A candidate that still looks like a bug but with a different
fingerprint is recorded as a fork, a new finding in its own right.

The oracle maps an :class:`~xlangfuzz.ir.IrProgram` to a
:class:`~xlangfuzz.harness.TestVerdict`; :func:`bundle_oracle` adapts one
that works on rendered source bundles.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator, Sequence

from .harness import FLAGGED, CompileOutcome, Mode, Result, Status, TestVerdict
from .ir import (
    STRING,
    TOP,
    ClassType,
    IrProgram,
    Lang,
    ParamDecl,
    SuperTypeRef,
    TypeDecl,
    TypeParam,
    TypeRef,
    from_dict,
    language_switch_complexity,
    to_dict,
    to_json,
    type_from_json,
    type_to_json,
)
from .mutators import _container, _set, _split, remove_method
from .render import RenderOptions, SourceBundle, render, write_bundle
from .validation import validate

Oracle = Callable[[IrProgram], TestVerdict]


class OracleDrift(RuntimeError):
    """The oracle does not reproduce the finding on the unreduced program."""


class PassKind(Enum):
    REMOVE_METHOD = "REMOVE_METHOD"
    FLATTEN_LANGUAGE = "FLATTEN_LANGUAGE"
    REPLACE_CUSTOM_TYPE = "REPLACE_CUSTOM_TYPE"
    CONCRETIZE_TYPE_PARAM = "CONCRETIZE_TYPE_PARAM"
    REMOVE_TYPE_PARAM = "REMOVE_TYPE_PARAM"
    REMOVE_DECL = "REMOVE_DECL"
    REORDER_SUPERTYPES = "REORDER_SUPERTYPES"


PRIORITY = (
    PassKind.REMOVE_METHOD,
    PassKind.FLATTEN_LANGUAGE,
    PassKind.REPLACE_CUSTOM_TYPE,
    PassKind.CONCRETIZE_TYPE_PARAM,
    PassKind.REMOVE_TYPE_PARAM,
    PassKind.REMOVE_DECL,
)


@dataclass(frozen=True)
class ReductionPass:
    """One concrete reduction step.

    ``target`` locates the edit: ``Decl/method`` for method removal,
    ``Decl/T`` for type parameter removal, a declaration name for flattening,
    declaration removal and reordering, or a JSON pointer for type sites.
    ``arg`` carries the replacement type (``STRING``/``TOP``) or the new
    supertype order (``"2,0,1"``).
    """

    kind: PassKind
    target: str
    arg: str | None = None

    def __str__(self) -> str:
        return f"{self.kind.value}({self.target}{'' if self.arg is None else ' -> ' + self.arg})"

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "target": self.target, "arg": self.arg}

    @classmethod
    def from_json(cls, d: dict) -> "ReductionPass":
        return cls(PassKind(d["kind"]), d["target"], d.get("arg"))


@dataclass(frozen=True)
class Fork:
    program: IrProgram
    verdict: TestVerdict
    via: ReductionPass


@dataclass(frozen=True)
class MinimizationResult:
    original: IrProgram
    minimized: IrProgram
    verdict: TestVerdict
    trail: tuple[tuple[ReductionPass, bool], ...]
    forked_findings: tuple[Fork, ...] = ()
    oracle_calls: int = 0
    budget_exhausted: bool = False

    @property
    def kept(self) -> list[ReductionPass]:
        return [p for p, k in self.trail if k]

    def trail_json(self) -> list[dict]:
        return [{**p.to_json(), "kept": k} for p, k in self.trail]


# ---------------------------------------------------------------------------
# Individual passes
# ---------------------------------------------------------------------------

_BUILTIN_BY_NAME = {"STRING": STRING, "TOP": TOP}


def flatten_language(program: IrProgram, decl_name: str, pivot: Lang = Lang.JAVA) -> IrProgram:
    """Rewrite one declaration in the pivot language."""
    return program.with_decl(replace(program[decl_name], lang=pivot))


def flatten_keeps_complexity(program: IrProgram, decl_name: str, pivot: Lang = Lang.JAVA) -> bool:
    """Whether flattening ``decl_name`` leaves the language-switch count no higher.

    Flattening the middle of a chain whose ends are not in the pivot language
    adds switches, so the minimizer only proposes flattenings that pass this.
    """
    after = flatten_language(program, decl_name, pivot)
    return language_switch_complexity(after) <= language_switch_complexity(program)


def _map_types(t: TypeRef, fn: Callable[[TypeRef], TypeRef | None]) -> TypeRef:
    """Rewrite ``t`` bottom-up; ``fn`` returns a replacement or ``None`` to keep."""
    if isinstance(t, ClassType) and t.args:
        t = ClassType(t.name, tuple(_map_types(a, fn) for a in t.args))
    new = fn(t)
    return t if new is None else new


def _map_decl_types(d: TypeDecl, fn: Callable[[TypeRef], TypeRef | None]) -> TypeDecl:
    supers = []
    for st in d.supertypes:
        ct = _map_types(st.as_type(), fn)
        # a supertype itself is never replaced, only its arguments
        if isinstance(ct, ClassType) and ct.name == st.target:
            supers.append(SuperTypeRef(st.target, ct.args))
        else:
            supers.append(SuperTypeRef(st.target, tuple(_map_types(a, fn) for a in st.args)))
    methods = tuple(
        replace(m, params=tuple(ParamDecl(p.name, _map_types(p.type, fn)) for p in m.params),
                return_type=_map_types(m.return_type, fn))
        for m in d.methods
    )
    return replace(d, supertypes=tuple(supers), methods=methods)


def remove_type_param(program: IrProgram, decl_name: str, param: str) -> IrProgram:
    """Drop a type parameter, turning its uses into STRING and dropping its argument everywhere."""
    decl = program[decl_name]
    idx = decl.type_params.index(param)

    def own(t):
        return STRING if isinstance(t, TypeParam) and t.name == param else None

    def drop_arg(t):
        if isinstance(t, ClassType) and t.name == decl_name and len(t.args) > idx:
            return ClassType(t.name, t.args[:idx] + t.args[idx + 1:])
        return None

    decls = []
    for d in program.declarations:
        if d.name == decl_name:
            d = _map_decl_types(d, own)
            d = replace(d, type_params=tuple(p for p in d.type_params if p != param))
        decls.append(_map_decl_types(d, drop_arg))
    return replace(program, declarations=tuple(decls))


def remove_decl(program: IrProgram, decl_name: str) -> IrProgram:
    """Delete a declaration and every reference to it."""
    def erase(t):
        return TOP if isinstance(t, ClassType) and t.name == decl_name else None

    decls = []
    for d in program.declarations:
        if d.name == decl_name:
            continue
        d = replace(d, supertypes=tuple(st for st in d.supertypes if st.target != decl_name))
        d = _map_decl_types(d, erase)
        d = replace(d, methods=tuple(
            replace(m, overrides=tuple(r for r in m.overrides if r.decl != decl_name)) for m in d.methods))
        decls.append(d)
    return replace(program, declarations=tuple(decls))


def _set_type(program: IrProgram, pointer: str, t: TypeRef) -> IrProgram:
    doc = to_dict(program)
    _set(doc, pointer, type_to_json(t))
    return replace(from_dict(doc), provenance=program.provenance)


def reorder_supertypes(program: IrProgram, decl_name: str, order: Sequence[int]) -> IrProgram:
    d = program[decl_name]
    return program.with_decl(replace(d, supertypes=tuple(d.supertypes[i] for i in order)))


def apply_pass(program: IrProgram, p: ReductionPass, pivot: Lang = Lang.JAVA) -> IrProgram:
    k = p.kind
    if k is PassKind.REMOVE_METHOD:
        decl, method = p.target.split("/")
        out, _ = remove_method(program, decl, method)
        return replace(out, provenance=program.provenance)
    if k is PassKind.FLATTEN_LANGUAGE:
        return flatten_language(program, p.target, pivot)
    if k in (PassKind.REPLACE_CUSTOM_TYPE, PassKind.CONCRETIZE_TYPE_PARAM):
        return _set_type(program, p.target, _BUILTIN_BY_NAME[p.arg or "STRING"])
    if k is PassKind.REMOVE_TYPE_PARAM:
        decl, param = p.target.split("/")
        return remove_type_param(program, decl, param)
    if k is PassKind.REMOVE_DECL:
        return remove_decl(program, p.target)
    if k is PassKind.REORDER_SUPERTYPES:
        return reorder_supertypes(program, p.target, [int(i) for i in (p.arg or "").split(",")])
    raise ValueError(k)


# ---------------------------------------------------------------------------
# Candidate enumeration
# ---------------------------------------------------------------------------


def _type_sites(program: IrProgram) -> Iterator[tuple[str, TypeRef]]:
    doc = to_dict(program)

    def walk(ptr):
        t = type_from_json(_container(doc, _split(ptr)))
        yield ptr, t
        if isinstance(t, ClassType):
            for k in range(len(t.args)):
                yield from walk(f"{ptr}/args/{k}")

    for i, d in enumerate(program.declarations):
        for s, st in enumerate(d.supertypes):
            for k in range(len(st.args)):
                yield from walk(f"/declarations/{i}/supertypes/{s}/args/{k}")
        for j, m in enumerate(d.methods):
            for k in range(len(m.params)):
                yield from walk(f"/declarations/{i}/methods/{j}/params/{k}/type")
            yield from walk(f"/declarations/{i}/methods/{j}/return")


def candidates(program: IrProgram, kind: PassKind, pivot: Lang = Lang.JAVA) -> list[ReductionPass]:
    """Every application of ``kind`` to ``program``, in a fixed order."""
    if kind is PassKind.REMOVE_METHOD:
        return [ReductionPass(kind, f"{d.name}/{m.name}") for d in program.declarations for m in d.methods]
    if kind is PassKind.FLATTEN_LANGUAGE:
        return [ReductionPass(kind, d.name) for d in program.declarations
                if d.lang is not pivot and flatten_keeps_complexity(program, d.name, pivot)]
    if kind is PassKind.REPLACE_CUSTOM_TYPE:
        out = []
        for ptr, t in _type_sites(program):
            if isinstance(t, ClassType):
                out += [ReductionPass(kind, ptr, "STRING"), ReductionPass(kind, ptr, "TOP")]
        return out
    if kind is PassKind.CONCRETIZE_TYPE_PARAM:
        return [ReductionPass(kind, ptr, "STRING") for ptr, t in _type_sites(program) if isinstance(t, TypeParam)]
    if kind is PassKind.REMOVE_TYPE_PARAM:
        return [ReductionPass(kind, f"{d.name}/{t}") for d in program.declarations for t in d.type_params]
    if kind is PassKind.REMOVE_DECL:
        return [ReductionPass(kind, d.name) for d in program.declarations]
    if kind is PassKind.REORDER_SUPERTYPES:
        out = []
        for d in program.declarations:
            n = len(d.supertypes)
            if n < 2:
                continue
            perms = itertools.permutations(range(n))
            next(perms)  # identity
            # a handful of orders is enough to surface order sensitivity
            for perm in itertools.islice(perms, 5):
                out.append(ReductionPass(kind, d.name, ",".join(map(str, perm))))
        return out
    raise ValueError(kind)


def size_measure(program: IrProgram) -> tuple[int, ...]:
    """Quantities that every kept reduction lowers (compared as a vector)."""
    sites = list(_type_sites(program))
    return (
        len(program.declarations),
        sum(len(d.methods) for d in program.declarations),
        sum(len(d.type_params) for d in program.declarations),
        sum(isinstance(t, ClassType) for _, t in sites),
        sum(isinstance(t, TypeParam) for _, t in sites),
        sum(d.lang is not Lang.JAVA for d in program.declarations),
    )


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def _same(a: TestVerdict, b: TestVerdict) -> bool:
    return a.result is b.result and a.fingerprint == b.fingerprint


def minimize(program: IrProgram, oracle: Oracle, budget: int = 1000, *,
             passes: Sequence[PassKind] = PRIORITY, explore_reorder: bool = False,
             expected: TestVerdict | None = None, pivot: Lang = Lang.JAVA) -> MinimizationResult:
    """Reduce ``program`` to a fixed point of ``passes`` under ``oracle``.

    ``budget`` caps oracle calls, the first reproduction included. With
    ``explore_reorder`` every supertype reordering of the result is tried
    once at the end; such changes are never kept but can fork findings.
    """
    calls = 1
    start = oracle(program)
    if start.result not in FLAGGED or (expected is not None and not _same(start, expected)):
        raise OracleDrift(f"oracle gave {start.result.value} {start.fingerprint!r}")
    current = program
    trail: list[tuple[ReductionPass, bool]] = []
    forks: list[Fork] = []
    seen = {start.fingerprint}
    exhausted = False

    def probe(p: ReductionPass) -> bool:
        nonlocal calls
        cand = apply_pass(current, p, pivot)
        if validate(cand, structural_only=True):
            return False
        calls += 1
        v = oracle(cand)
        if _same(v, start):
            return True
        if v.result in FLAGGED and v.fingerprint not in seen:
            seen.add(v.fingerprint)
            forks.append(Fork(cand, v, p))
        return False

    progress = True
    while progress and not exhausted:
        progress = False
        for kind in passes:
            for p in candidates(current, kind, pivot):
                if calls >= budget:
                    exhausted = True
                    break
                if probe(p):
                    current = apply_pass(current, p, pivot)
                    trail.append((p, True))
                    progress = True
                    break
                trail.append((p, False))
            if progress or exhausted:
                break

    if explore_reorder:
        for p in candidates(current, PassKind.REORDER_SUPERTYPES, pivot):
            if calls >= budget:
                exhausted = True
                break
            # a reorder that keeps the bug teaches nothing; it is never kept
            probe(p)
            trail.append((p, False))

    return MinimizationResult(program, current, start, tuple(trail), tuple(forks), calls, exhausted)


def replay_trail(program: IrProgram, trail: Sequence[tuple[ReductionPass, bool]],
                 pivot: Lang = Lang.JAVA) -> IrProgram:
    for p, kept in trail:
        if kept:
            program = apply_pass(program, p, pivot)
    return program


# ---------------------------------------------------------------------------
# Oracles and output
# ---------------------------------------------------------------------------


def bundle_oracle(test: Callable[[SourceBundle], TestVerdict],
                  options: RenderOptions = RenderOptions()) -> Oracle:
    """Turn a bundle-level test into a program oracle by rendering first."""
    return lambda program: test(render(program, options))


def predicate_oracle(pred: Callable[[IrProgram], bool], fingerprint: str = "synthetic") -> Oracle:
    """An in-process oracle that flags exactly the programs satisfying ``pred``."""
    def oracle(program: IrProgram) -> TestVerdict:
        if pred(program):
            o = CompileOutcome(Status.REJECT, 1, fingerprint, 0, fingerprint, "predicate")
            return TestVerdict(Mode.NORMAL, Result.NORMAL_REJECT, (o,))
        o = CompileOutcome(Status.PASS, 0, "", 0, "", "predicate")
        return TestVerdict(Mode.NORMAL, Result.OK, (o,))

    return oracle


def write_result(result: MinimizationResult, root: Path, options: RenderOptions = RenderOptions()) -> Path:
    """Write the reduced bundle, its IR, the trail and a short report under ``root``."""
    root = Path(root)
    write_bundle(render(result.minimized, options), root)
    (root / "program.json").write_text(to_json(result.minimized))
    (root / "trail.json").write_text(json.dumps(result.trail_json(), indent=2) + "\n")
    lines = [
        "# Minimization report",
        "",
        f"- verdict: {result.verdict.result.value} (fingerprint `{result.verdict.fingerprint}`)",
        f"- declarations: {len(result.original.declarations)} -> {len(result.minimized.declarations)}",
        f"- kept reductions: {len(result.kept)} of {len(result.trail)} tried",
        f"- oracle calls: {result.oracle_calls}" + (" (budget exhausted)" if result.budget_exhausted else ""),
        f"- forked findings: {len(result.forked_findings)}",
        "",
        "## Kept reductions",
        "",
        *[f"1. {p}" for p in result.kept],
        "",
    ]
    (root / "report.md").write_text("\n".join(lines))
    return root


__all__ = [
    "Fork", "MinimizationResult", "Oracle", "OracleDrift", "PassKind", "PRIORITY", "ReductionPass",
    "apply_pass", "bundle_oracle", "candidates", "flatten_keeps_complexity", "flatten_language",
    "minimize", "predicate_oracle", "remove_decl", "remove_type_param", "reorder_supertypes",
    "replay_trail", "size_measure", "write_result",
]
