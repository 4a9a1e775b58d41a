"""Language-neutral program model for JVM-family fuzzing.

A program is an ordered list of class/interface declarations, each tagged with
the language its source file will be written in. Declarations carry type
parameters, supertypes (possibly parameterized) and member methods; methods
record which inherited methods they override. There are no expressions,
fields, constructors or access modifiers.

All values are frozen dataclasses holding tuples, so programs can be shared
freely and edited with :func:`dataclasses.replace`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Iterator, Mapping, Union


class Kind(Enum):
    CLASS = "CLASS"
    INTERFACE = "INTERFACE"


class Modifier(Enum):
    OPEN = "OPEN"
    FINAL = "FINAL"
    ABSTRACT = "ABSTRACT"


class Lang(Enum):
    JAVA = "JAVA"
    KOTLIN = "KOTLIN"
    GROOVY = "GROOVY"
    SCALA = "SCALA"


class MethodKind(Enum):
    ABSTRACT = "ABSTRACT"
    FINAL = "FINAL"
    NORMAL = "NORMAL"


class Builtin(Enum):
    TOP = "TOP"
    STRING = "STRING"
    INT = "INT"
    UNIT = "UNIT"


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassType:
    """A reference to a declared class or interface, fully applied."""

    name: str
    args: tuple["TypeRef", ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}<{', '.join(map(str, self.args))}>"


@dataclass(frozen=True)
class TypeParam:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class BuiltinType:
    builtin: Builtin

    def __str__(self) -> str:
        return self.builtin.value


TypeRef = Union[ClassType, TypeParam, BuiltinType]

TOP = BuiltinType(Builtin.TOP)
STRING = BuiltinType(Builtin.STRING)
INT = BuiltinType(Builtin.INT)
UNIT = BuiltinType(Builtin.UNIT)

#: Builtins usable anywhere a value type is expected (UNIT is return-only).
VALUE_BUILTINS: tuple[BuiltinType, ...] = (TOP, STRING, INT)


class UnboundTypeParam(KeyError):
    """A type parameter had no entry in a substitution binding."""


class UnresolvedSupertype(LookupError):
    """A supertype names a declaration absent from the program."""


def substitute(t: TypeRef, binding: Mapping[str, TypeRef]) -> TypeRef:
    """Replace every type parameter in ``t`` using ``binding``."""
    if isinstance(t, TypeParam):
        try:
            return binding[t.name]
        except KeyError:
            raise UnboundTypeParam(t.name) from None
    if isinstance(t, ClassType):
        if not t.args:
            return t
        return ClassType(t.name, tuple(substitute(a, binding) for a in t.args))
    return t


def type_params_in(t: TypeRef) -> Iterator[str]:
    if isinstance(t, TypeParam):
        yield t.name
    elif isinstance(t, ClassType):
        for a in t.args:
            yield from type_params_in(a)


def class_names_in(t: TypeRef) -> Iterator[str]:
    if isinstance(t, ClassType):
        yield t.name
        for a in t.args:
            yield from class_names_in(a)


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class MethodRef:
    decl: str
    method: str

    def __str__(self) -> str:
        return f"{self.decl}::{self.method}"


@dataclass(frozen=True)
class ParamDecl:
    name: str
    type: TypeRef


@dataclass(frozen=True)
class MethodDecl:
    name: str
    params: tuple[ParamDecl, ...] = ()
    return_type: TypeRef = UNIT
    kind: MethodKind = MethodKind.NORMAL
    overrides: tuple[MethodRef, ...] = ()

    def __post_init__(self) -> None:
        # overrides is a set; keep it sorted so equality and JSON are canonical
        object.__setattr__(self, "overrides", tuple(sorted(set(self.overrides))))

    @property
    def param_types(self) -> tuple[TypeRef, ...]:
        return tuple(p.type for p in self.params)


@dataclass(frozen=True)
class SuperTypeRef:
    target: str
    args: tuple[TypeRef, ...] = ()

    def as_type(self) -> ClassType:
        return ClassType(self.target, self.args)

    def __str__(self) -> str:
        return str(self.as_type())


@dataclass(frozen=True)
class TypeDecl:
    name: str
    kind: Kind
    lang: Lang = Lang.JAVA
    modifier: Modifier = Modifier.OPEN
    type_params: tuple[str, ...] = ()
    supertypes: tuple[SuperTypeRef, ...] = ()
    methods: tuple[MethodDecl, ...] = ()

    @property
    def is_interface(self) -> bool:
        return self.kind is Kind.INTERFACE

    @property
    def is_abstract(self) -> bool:
        return self.is_interface or self.modifier is Modifier.ABSTRACT

    def method(self, name: str) -> MethodDecl | None:
        for m in self.methods:
            if m.name == name:
                return m
        return None


@dataclass(frozen=True)
class MutationRecord:
    """One applied mutation, replayable against the canonical JSON form.

    ``path`` is a JSON pointer into :func:`to_dict` output; ``before`` and
    ``after`` are the JSON values found there (``None`` meaning absent).
    ``repairs`` lists secondary edits forced by the primary one, as
    ``(path, before, after)`` triples, applied after it.
    """

    mutator: str
    decl: str
    path: str
    before: Any
    after: Any
    method: str | None = None
    site: str | None = None
    draw: int = 0
    repairs: tuple[tuple[str, Any, Any], ...] = ()


@dataclass(frozen=True)
class IrProgram:
    declarations: tuple[TypeDecl, ...] = ()
    seed: int = 0
    provenance: tuple[MutationRecord, ...] = ()

    @cached_property
    def _index(self) -> dict[str, TypeDecl]:
        return {d.name: d for d in self.declarations}

    def get(self, name: str) -> TypeDecl | None:
        return self._index.get(name)

    def __getitem__(self, name: str) -> TypeDecl:
        try:
            return self._index[name]
        except KeyError:
            raise UnresolvedSupertype(name) from None

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def names(self) -> list[str]:
        return [d.name for d in self.declarations]

    def with_decl(self, decl: TypeDecl) -> "IrProgram":
        """Return a copy with ``decl`` replacing the same-named declaration."""
        decls = tuple(decl if d.name == decl.name else d for d in self.declarations)
        return replace(self, declarations=decls)

    def languages(self) -> set[Lang]:
        return {d.lang for d in self.declarations}


# ---------------------------------------------------------------------------
# Hierarchy queries
# ---------------------------------------------------------------------------


def superclass(decl: TypeDecl, program: IrProgram) -> SuperTypeRef | None:
    for st in decl.supertypes:
        target = program.get(st.target)
        if target is not None and target.kind is Kind.CLASS:
            return st
    return None


def binding_for(st: SuperTypeRef, program: IrProgram) -> dict[str, TypeRef]:
    target = program[st.target]
    return dict(zip(target.type_params, st.args))


def ancestor_bindings(decl: TypeDecl, program: IrProgram) -> dict[str, list[dict[str, TypeRef]]]:
    """Map each proper ancestor to the bindings of its type parameters.

    One binding per inheritance path, expressed in ``decl``'s own scope. A
    well-formed program has all bindings for an ancestor equal.
    """
    out: dict[str, list[dict[str, TypeRef]]] = {}
    for st in decl.supertypes:
        parent = program[st.target]
        b = binding_for(st, program)
        out.setdefault(parent.name, []).append(b)
        for anc, paths in ancestor_bindings(parent, program).items():
            for pb in paths:
                out.setdefault(anc, []).append(
                    {k: substitute(v, b) for k, v in pb.items()}
                )
    return out


def ancestors(decl: TypeDecl, program: IrProgram) -> set[str]:
    seen: set[str] = set()
    stack = [st.target for st in decl.supertypes]
    while stack:
        n = stack.pop()
        if n in seen or n not in program:
            continue
        seen.add(n)
        stack.extend(st.target for st in program[n].supertypes)
    return seen


@dataclass(frozen=True)
class MethodSignature:
    """Override key: method name plus parameter types after substitution."""

    name: str
    param_types: tuple[TypeRef, ...]

    def __str__(self) -> str:
        return f"{self.name}({', '.join(map(str, self.param_types))})"


@dataclass(frozen=True)
class Inherited:
    """A method seen from a subtype, with types rewritten into its scope."""

    owner: str
    method: MethodDecl
    param_types: tuple[TypeRef, ...]
    return_type: TypeRef

    @property
    def ref(self) -> MethodRef:
        return MethodRef(self.owner, self.method.name)

    @property
    def kind(self) -> MethodKind:
        return self.method.kind

    @property
    def signature(self) -> MethodSignature:
        return MethodSignature(self.method.name, self.param_types)

    def substituted(self, binding: Mapping[str, TypeRef]) -> "Inherited":
        return Inherited(
            self.owner,
            self.method,
            tuple(substitute(t, binding) for t in self.param_types),
            substitute(self.return_type, binding),
        )


@dataclass
class InheritedMethods:
    method_in_super_class: Inherited | None = None
    methods_in_interfaces: list[Inherited] = field(default_factory=list)

    def all(self) -> list[Inherited]:
        head = [self.method_in_super_class] if self.method_in_super_class else []
        return head + list(self.methods_in_interfaces)


def signature_of(method: MethodDecl) -> MethodSignature:
    return MethodSignature(method.name, method.param_types)


def _own(decl: TypeDecl) -> dict[MethodSignature, Inherited]:
    return {
        signature_of(m): Inherited(decl.name, m, m.param_types, m.return_type)
        for m in decl.methods
    }


def overrides_transitively(a: MethodRef, b: MethodRef, program: IrProgram) -> bool:
    """True when method ``a`` overrides ``b`` directly or through a chain."""
    seen: set[MethodRef] = set()
    stack = [a]
    while stack:
        cur = stack.pop()
        d = program.get(cur.decl)
        m = d.method(cur.method) if d else None
        if m is None:
            continue
        for nxt in m.overrides:
            if nxt == b:
                return True
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def _most_derived(items: list[Inherited], program: IrProgram) -> list[Inherited]:
    unique: list[Inherited] = []
    for it in items:
        if all(it.ref != u.ref for u in unique):
            unique.append(it)
    return [
        it
        for it in unique
        if not any(
            o.ref != it.ref and overrides_transitively(o.ref, it.ref, program)
            for o in unique
        )
    ]


class _Views:
    """Memoized member views of declarations, each in its own type scope."""

    def __init__(self, program: IrProgram):
        self.program = program
        self._iface: dict[str, dict[MethodSignature, list[Inherited]]] = {}
        self._cls: dict[str, dict[MethodSignature, InheritedMethods]] = {}

    def interface(self, name: str) -> dict[MethodSignature, list[Inherited]]:
        if name in self._iface:
            return self._iface[name]
        decl = self.program[name]
        own = _own(decl)
        view: dict[MethodSignature, list[Inherited]] = {s: [m] for s, m in own.items()}
        for st in decl.supertypes:
            b = binding_for(st, self.program)
            for inh_list in self.interface(st.target).values():
                for inh in inh_list:
                    sub = inh.substituted(b)
                    if sub.signature in own:
                        continue
                    view.setdefault(sub.signature, []).append(sub)
        view = {s: _most_derived(v, self.program) for s, v in view.items()}
        self._iface[name] = view
        return view

    def klass(self, name: str) -> dict[MethodSignature, InheritedMethods]:
        if name in self._cls:
            return self._cls[name]
        decl = self.program[name]
        view = {s: InheritedMethods(m) for s, m in _own(decl).items()}
        sc = superclass(decl, self.program)
        if sc is not None:
            b = binding_for(sc, self.program)
            for entry in self.klass(sc.target).values():
                cm = entry.method_in_super_class.substituted(b) if entry.method_in_super_class else None
                ims = [i.substituted(b) for i in entry.methods_in_interfaces]
                sig = cm.signature if cm else ims[0].signature
                if sig not in view:
                    view[sig] = InheritedMethods(cm, ims)
        for st in decl.supertypes:
            if st is sc:
                continue
            b = binding_for(st, self.program)
            for inh_list in self.interface(st.target).values():
                for inh in inh_list:
                    sub = inh.substituted(b)
                    entry = view.setdefault(sub.signature, InheritedMethods())
                    if entry.method_in_super_class is None:
                        entry.methods_in_interfaces.append(sub)
        for entry in view.values():
            entry.methods_in_interfaces = _most_derived(entry.methods_in_interfaces, self.program)
        self._cls[name] = view
        return view


def collect_method_signature_map(
    decl: TypeDecl, program: IrProgram
) -> dict[MethodSignature, InheritedMethods]:
    """Group the methods inherited through ``decl``'s direct supertypes.

    Each direct supertype contributes its most-derived visible method per
    signature: a class supertype yields the first declaring class along its
    superclass chain (falling back to the interface methods it inherits), an
    interface supertype yields its own or its most-derived inherited methods.
    Interface contributions from different direct supertypes are kept side by
    side, so a method reached along two paths appears twice.
    """
    views = _Views(program)
    result: dict[MethodSignature, InheritedMethods] = {}
    for st in decl.supertypes:
        target = program[st.target]
        b = dict(zip(target.type_params, st.args))
        if target.kind is Kind.CLASS:
            for entry in views.klass(target.name).values():
                cm = entry.method_in_super_class.substituted(b) if entry.method_in_super_class else None
                ims = [i.substituted(b) for i in entry.methods_in_interfaces]
                sig = cm.signature if cm else ims[0].signature
                slot = result.setdefault(sig, InheritedMethods())
                slot.method_in_super_class = cm
                slot.methods_in_interfaces.extend(ims)
        else:
            for inh_list in views.interface(target.name).values():
                for inh in inh_list:
                    sub = inh.substituted(b)
                    result.setdefault(sub.signature, InheritedMethods()).methods_in_interfaces.append(sub)
    return {s: e for s, e in result.items() if e.all()}


def visible_members(decl: TypeDecl, program: IrProgram) -> dict[MethodSignature, InheritedMethods]:
    """Members of ``decl`` itself (declared or inherited), in its own scope."""
    if decl.name not in program:
        program = replace(program, declarations=program.declarations + (decl,))
    views = _Views(program)
    if decl.is_interface:
        return {s: InheritedMethods(None, v) for s, v in views.interface(decl.name).items()}
    return views.klass(decl.name)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def inheritance_depth(program: IrProgram) -> int:
    """Length, in supertype edges, of the longest inheritance chain."""
    memo: dict[str, int] = {}

    def height(name: str) -> int:
        if name not in memo:
            d = program.get(name)
            parents = [st.target for st in d.supertypes if st.target in program] if d else []
            memo[name] = max((1 + height(p) for p in parents), default=0)
        return memo[name]

    return max((height(d.name) for d in program.declarations), default=0)


def inheritance_width(program: IrProgram) -> int:
    """Largest number of supertypes listed by a single declaration."""
    return max((len(d.supertypes) for d in program.declarations), default=0)


def references(decl: TypeDecl) -> set[str]:
    """Names of declarations that ``decl`` mentions anywhere."""
    out = {st.target for st in decl.supertypes}
    for st in decl.supertypes:
        for a in st.args:
            out.update(class_names_in(a))
    for m in decl.methods:
        out.update(class_names_in(m.return_type))
        for p in m.params:
            out.update(class_names_in(p.type))
    out.discard(decl.name)
    return out


def is_cross_language(program: IrProgram) -> bool:
    """Whether some declaration references one written in another language."""
    for d in program.declarations:
        for name in references(d):
            other = program.get(name)
            if other is not None and other.lang is not d.lang:
                return True
    return False


def is_generic(program: IrProgram) -> bool:
    return any(d.type_params for d in program.declarations)


def language_switch_complexity(program: IrProgram) -> int:
    """Most language switches along any base-to-leaf inheritance chain."""
    memo: dict[str, int] = {}

    def worst(name: str) -> int:
        if name not in memo:
            d = program[name]
            best = 0
            for st in d.supertypes:
                p = program.get(st.target)
                if p is None:
                    continue
                best = max(best, worst(p.name) + (p.lang is not d.lang))
            memo[name] = best
        return memo[name]

    return max((worst(d.name) for d in program.declarations), default=0)


# ---------------------------------------------------------------------------
# Canonical JSON form
# ---------------------------------------------------------------------------


def type_to_json(t: TypeRef) -> dict[str, Any]:
    if isinstance(t, ClassType):
        return {"class": t.name, "args": [type_to_json(a) for a in t.args]}
    if isinstance(t, TypeParam):
        return {"param": t.name}
    return {"builtin": t.builtin.value}


def type_from_json(d: Mapping[str, Any]) -> TypeRef:
    if "class" in d:
        return ClassType(d["class"], tuple(type_from_json(a) for a in d.get("args", ())))
    if "param" in d:
        return TypeParam(d["param"])
    return BuiltinType(Builtin(d["builtin"]))


def method_to_json(m: MethodDecl) -> dict[str, Any]:
    return {
        "name": m.name,
        "kind": m.kind.value,
        "params": [{"name": p.name, "type": type_to_json(p.type)} for p in m.params],
        "return": type_to_json(m.return_type),
        "overrides": [[r.decl, r.method] for r in m.overrides],
    }


def method_from_json(d: Mapping[str, Any]) -> MethodDecl:
    return MethodDecl(
        name=d["name"],
        params=tuple(ParamDecl(p["name"], type_from_json(p["type"])) for p in d["params"]),
        return_type=type_from_json(d["return"]),
        kind=MethodKind(d["kind"]),
        overrides=tuple(MethodRef(a, b) for a, b in d["overrides"]),
    )


def decl_to_json(d: TypeDecl) -> dict[str, Any]:
    return {
        "name": d.name,
        "kind": d.kind.value,
        "modifier": d.modifier.value,
        "lang": d.lang.value,
        "typeParams": list(d.type_params),
        "supertypes": [
            {"target": st.target, "args": [type_to_json(a) for a in st.args]}
            for st in d.supertypes
        ],
        "methods": [method_to_json(m) for m in d.methods],
    }


def decl_from_json(d: Mapping[str, Any]) -> TypeDecl:
    return TypeDecl(
        name=d["name"],
        kind=Kind(d["kind"]),
        modifier=Modifier(d["modifier"]),
        lang=Lang(d["lang"]),
        type_params=tuple(d["typeParams"]),
        supertypes=tuple(
            SuperTypeRef(s["target"], tuple(type_from_json(a) for a in s["args"]))
            for s in d["supertypes"]
        ),
        methods=tuple(method_from_json(m) for m in d["methods"]),
    )


def record_to_json(r: MutationRecord) -> dict[str, Any]:
    return {
        "mutator": r.mutator,
        "decl": r.decl,
        "method": r.method,
        "site": r.site,
        "path": r.path,
        "before": r.before,
        "after": r.after,
        "draw": r.draw,
        "repairs": [list(x) for x in r.repairs],
    }


def record_from_json(d: Mapping[str, Any]) -> MutationRecord:
    return MutationRecord(
        mutator=d["mutator"],
        decl=d["decl"],
        method=d.get("method"),
        site=d.get("site"),
        path=d["path"],
        before=d["before"],
        after=d["after"],
        draw=d.get("draw", 0),
        repairs=tuple(tuple(x) for x in d.get("repairs", ())),
    )


def to_dict(program: IrProgram) -> dict[str, Any]:
    return {
        "seed": program.seed,
        "declarations": [decl_to_json(d) for d in program.declarations],
        "provenance": [record_to_json(r) for r in program.provenance],
    }


def from_dict(d: Mapping[str, Any]) -> IrProgram:
    return IrProgram(
        declarations=tuple(decl_from_json(x) for x in d["declarations"]),
        seed=int(d.get("seed", 0)),
        provenance=tuple(record_from_json(r) for r in d.get("provenance", ())),
    )


def to_json(program: IrProgram) -> str:
    return json.dumps(to_dict(program), indent=2) + "\n"


def from_json(text: str) -> IrProgram:
    return from_dict(json.loads(text))


def iter_methods(program: IrProgram) -> Iterable[tuple[TypeDecl, MethodDecl]]:
    for d in program.declarations:
        for m in d.methods:
            yield d, m
