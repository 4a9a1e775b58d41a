"""Single-locus program mutators.

Each mutator edits exactly one place in a program: a language tag, a method,
a type site, or the order of one supertype list. The edit is recorded as a
:class:`~xlangfuzz.ir.MutationRecord` addressed by a JSON pointer into the
canonical form, so it can be replayed or undone without knowing which
mutator produced it. Mutants are structurally well formed but their typing
is deliberately not checked.
"""

from __future__ import annotations

import copy
from dataclasses import replace
from typing import Any, Callable, Iterator, Sequence

from .generator import Rng
from .ir import (
    UNIT,
    VALUE_BUILTINS,
    ClassType,
    IrProgram,
    Lang,
    MutationRecord,
    TypeDecl,
    TypeParam,
    TypeRef,
    from_dict,
    to_dict,
    type_from_json,
    type_to_json,
)

LANG_SHUFFLER = "LANG_SHUFFLER"
FUNCTION_REMOVAL = "FUNCTION_REMOVAL"
TYPE_CHANGER = "TYPE_CHANGER"
SUPERTYPE_ORDER = "SUPERTYPE_ORDER"

DEFAULT_MUTATORS = (LANG_SHUFFLER, FUNCTION_REMOVAL, TYPE_CHANGER)
ALL_MUTATORS = DEFAULT_MUTATORS + (SUPERTYPE_ORDER,)


class NoMutationPossible(Exception):
    pass


# ---------------------------------------------------------------------------
# JSON-pointer replay
# ---------------------------------------------------------------------------


def _split(path: str) -> list[str]:
    return [p for p in path.split("/") if p]


def _container(doc: Any, parts: list[str]) -> Any:
    for p in parts:
        doc = doc[int(p)] if isinstance(doc, list) else doc[p]
    return doc


def _set(doc: Any, path: str, value: Any, *, remove: bool = False, insert: bool = False) -> None:
    parts = _split(path)
    parent = _container(doc, parts[:-1])
    key = parts[-1]
    if isinstance(parent, list):
        i = int(key)
        if remove:
            del parent[i]
        elif insert:
            parent.insert(i, value)
        else:
            parent[i] = value
    elif remove:
        del parent[key]
    else:
        parent[key] = value


def _apply_edit(doc: Any, path: str, before: Any, after: Any) -> None:
    if after is None:
        _set(doc, path, None, remove=True)
    elif before is None:
        _set(doc, path, after, insert=True)
    else:
        _set(doc, path, copy.deepcopy(after))


def replay(program: IrProgram, record: MutationRecord) -> IrProgram:
    """Apply ``record`` to ``program`` (its pre-image) and append it to provenance."""
    doc = to_dict(program)
    _apply_edit(doc, record.path, record.before, record.after)
    for path, before, after in record.repairs:
        _apply_edit(doc, path, before, after)
    out = from_dict(doc)
    return replace(out, provenance=program.provenance + (record,))


def invert(program: IrProgram, record: MutationRecord) -> IrProgram:
    """Undo ``record`` on its post-image, dropping it from provenance."""
    doc = to_dict(program)
    for path, before, after in reversed(record.repairs):
        _apply_edit(doc, path, after, before)
    _apply_edit(doc, record.path, record.after, record.before)
    out = from_dict(doc)
    prov = program.provenance
    if prov and prov[-1] == record:
        prov = prov[:-1]
    return replace(out, provenance=prov)


def _decl_index(program: IrProgram, name: str) -> int:
    return program.names().index(name)


# ---------------------------------------------------------------------------
# Mutators
# ---------------------------------------------------------------------------


def lang_shuffler(program: IrProgram, rng: Rng,
                  languages: Sequence[Lang] = (Lang.JAVA, Lang.KOTLIN),
                  max_retries: int = 8) -> tuple[IrProgram, MutationRecord]:
    """Move one declaration to another language of the campaign set.

    A draw that would leave the program mixing Java with two other languages
    is redrawn.
    """
    langs = sorted(set(languages), key=lambda l: l.value)
    if len(langs) < 2 or not program.declarations:
        raise NoMutationPossible("need two languages and one declaration")
    draw = rng.draws
    for _ in range(max_retries):
        decl = rng.choice(program.declarations)
        new = rng.choice([l for l in langs if l is not decl.lang])
        others = {d.lang for d in program.declarations if d.name != decl.name} | {new}
        if len(others - {Lang.JAVA}) <= 1:
            break
    else:
        raise NoMutationPossible("every retag mixes more than two languages")
    i = _decl_index(program, decl.name)
    rec = MutationRecord(LANG_SHUFFLER, decl.name, f"/declarations/{i}/lang",
                         decl.lang.value, new.value, draw=draw)
    return replay(program, rec), rec


def _dangling_repairs(program: IrProgram, decl: str, method: str) -> list[tuple[str, Any, Any]]:
    repairs = []
    for i, d in enumerate(program.declarations):
        for j, m in enumerate(d.methods):
            if d.name == decl and m.name == method:
                continue
            for k, ref in enumerate(m.overrides):
                if ref.decl == decl and ref.method == method:
                    # removing entry k shifts later ones; repairs run in order
                    path = f"/declarations/{i}/methods/{j}/overrides/{k}"
                    repairs.append((path, [ref.decl, ref.method], None))
    return repairs


def _remove_method_record(program: IrProgram, decl: TypeDecl, method_name: str, draw: int,
                          mutator: str = FUNCTION_REMOVAL) -> MutationRecord:
    i = _decl_index(program, decl.name)
    j = [m.name for m in decl.methods].index(method_name)
    doc = to_dict(program)
    before = doc["declarations"][i]["methods"][j]
    repairs = _dangling_repairs(program, decl.name, method_name)
    # shift same-decl repair indices past the removed method
    fixed = []
    for path, b, a in repairs:
        parts = _split(path)
        if int(parts[1]) == i and int(parts[3]) > j:
            parts[3] = str(int(parts[3]) - 1)
        fixed.append(("/" + "/".join(parts), b, a))
    return MutationRecord(mutator, decl.name, f"/declarations/{i}/methods/{j}",
                          before, None, method=method_name, draw=draw, repairs=tuple(fixed))


def remove_method(program: IrProgram, decl_name: str, method_name: str) -> tuple[IrProgram, MutationRecord]:
    rec = _remove_method_record(program, program[decl_name], method_name, 0)
    return replay(program, rec), rec


def function_removal(program: IrProgram, rng: Rng) -> tuple[IrProgram, MutationRecord]:
    """Delete one method; overrides that pointed at it are dropped."""
    sites = [(d, m.name) for d in program.declarations for m in d.methods]
    if not sites:
        raise NoMutationPossible("program has no methods")
    draw = rng.draws
    decl, name = rng.choice(sites)
    rec = _remove_method_record(program, decl, name, draw)
    return replay(program, rec), rec


def type_sites(program: IrProgram) -> Iterator[tuple[TypeDecl, str, str, TypeRef, bool]]:
    """Every mutable type position as ``(decl, pointer, locator, type, return_pos)``.

    Positions nested inside type arguments are included.
    """
    def walk(decl, ptr, loc, t, ret):
        yield decl, ptr, loc, t, ret
        if isinstance(t, ClassType):
            for k, a in enumerate(t.args):
                yield from walk(decl, f"{ptr}/args/{k}", f"{loc}<{k}>", a, False)

    for i, d in enumerate(program.declarations):
        for s, st in enumerate(d.supertypes):
            for k, a in enumerate(st.args):
                yield from walk(d, f"/declarations/{i}/supertypes/{s}/args/{k}",
                                f"supertype {st.target}<{k}>", a, False)
        for j, m in enumerate(d.methods):
            for k, prm in enumerate(m.params):
                yield from walk(d, f"/declarations/{i}/methods/{j}/params/{k}/type",
                                f"{m.name}.{prm.name}", prm.type, False)
            yield from walk(d, f"/declarations/{i}/methods/{j}/return",
                            f"{m.name}.return", m.return_type, True)


def replacement_types(decl: TypeDecl, program: IrProgram, return_pos: bool) -> list[TypeRef]:
    pool: list[TypeRef] = list(VALUE_BUILTINS)
    if return_pos:
        pool.append(UNIT)
    pool += [ClassType(d.name) for d in program.declarations if not d.type_params]
    pool += [TypeParam(t) for t in decl.type_params]
    return pool


def type_changer(program: IrProgram, rng: Rng) -> tuple[IrProgram, MutationRecord]:
    """Swap the type at one site for another in-scope, arity-0 type."""
    options = []
    for decl, ptr, loc, t, ret in type_sites(program):
        alts = [a for a in replacement_types(decl, program, ret) if a != t]
        if alts:
            options.append((decl, ptr, loc, t, alts))
    if not options:
        raise NoMutationPossible("no type site has an alternative")
    draw = rng.draws
    decl, ptr, loc, t, alts = rng.choice(options)
    new = rng.choice(alts)
    method = loc.split(".")[0] if not loc.startswith("supertype") else None
    rec = MutationRecord(TYPE_CHANGER, decl.name, ptr, type_to_json(t), type_to_json(new),
                         method=method, site=loc, draw=draw)
    return replay(program, rec), rec


def supertype_order_shuffle(program: IrProgram, rng: Rng) -> tuple[IrProgram, MutationRecord]:
    """Permute the supertype list of one declaration with two or more supertypes."""
    cands = [(i, d) for i, d in enumerate(program.declarations) if len(d.supertypes) >= 2]
    if not cands:
        raise NoMutationPossible("no declaration has two supertypes")
    draw = rng.draws
    i, decl = rng.choice(cands)
    doc = to_dict(program)
    before = doc["declarations"][i]["supertypes"]
    order = list(range(len(before)))
    while order == list(range(len(before))):
        order = rng.shuffled(order)
    after = [before[k] for k in order]
    rec = MutationRecord(SUPERTYPE_ORDER, decl.name, f"/declarations/{i}/supertypes",
                         before, after, draw=draw)
    return replay(program, rec), rec


MUTATORS: dict[str, Callable[..., tuple[IrProgram, MutationRecord]]] = {
    LANG_SHUFFLER: lang_shuffler,
    FUNCTION_REMOVAL: function_removal,
    TYPE_CHANGER: type_changer,
    SUPERTYPE_ORDER: supertype_order_shuffle,
}

#: Display names used in reports.
MUTATOR_LABELS = {
    LANG_SHUFFLER: "LangShuffler",
    FUNCTION_REMOVAL: "FunctionRemoval",
    TYPE_CHANGER: "TypeChanger",
    SUPERTYPE_ORDER: "SupertypeOrder",
}


def mutate(program: IrProgram, rng: Rng, enabled: Sequence[str] = DEFAULT_MUTATORS,
           languages: Sequence[Lang] = (Lang.JAVA, Lang.KOTLIN)) -> tuple[IrProgram, MutationRecord]:
    """Apply one mutator drawn uniformly from ``enabled``.

    Mutators that cannot apply are skipped and another is drawn.
    """
    remaining = list(enabled)
    while remaining:
        name = rng.choice(remaining)
        try:
            if name == LANG_SHUFFLER:
                return lang_shuffler(program, rng, languages)
            return MUTATORS[name](program, rng)
        except NoMutationPossible:
            remaining.remove(name)
    raise NoMutationPossible("no enabled mutator applies")


def type_at(program: IrProgram, pointer: str) -> TypeRef:
    return type_from_json(_container(to_dict(program), _split(pointer)))
