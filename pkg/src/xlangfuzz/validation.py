"""Well-formedness checks for IR programs.

Violations are data: :func:`validate` never raises on a malformed program,
it reports every problem it finds with a path to the offending element.

Two strengths are offered. ``structural_only=True`` checks what every program
handled by the pipeline must satisfy (names resolve, arities match, the
hierarchy is acyclic, ...). The full check additionally enforces the typing
rules that generated programs are asserted to obey: consistent type arguments
for each ancestor, and overrides that really match what they override. Mutated
programs are only held to the structural level, since breaking those typing
rules is exactly what mutation is for.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ir import (
    Builtin,
    BuiltinType,
    ClassType,
    IrProgram,
    Kind,
    MethodKind,
    Modifier,
    TypeDecl,
    TypeParam,
    TypeRef,
    UnboundTypeParam,
    ancestor_bindings,
    collect_method_signature_map,
    signature_of,
    substitute,
)


@dataclass(frozen=True)
class Violation:
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.path}: {self.message}"


ValidationReport = list[Violation]


def _sccs(graph: dict[str, list[str]]) -> list[list[str]]:
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    out: list[list[str]] = []
    counter = 0

    def visit(v: str) -> None:
        nonlocal counter
        index[v] = low[v] = counter
        counter += 1
        stack.append(v)
        on_stack.add(v)
        for w in graph.get(v, ()):
            if w not in graph:
                continue
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(comp)

    for v in graph:
        if v not in index:
            visit(v)
    return out


class _Checker:
    def __init__(self, program: IrProgram, structural_only: bool):
        self.p = program
        self.structural_only = structural_only
        self.report: ValidationReport = []

    def add(self, code: str, path: str, message: str) -> None:
        self.report.append(Violation(code, path, message))

    def check_type(self, t: TypeRef, scope: TypeDecl, path: str, *, return_pos: bool = False,
                   type_arg: bool = False) -> None:
        if isinstance(t, BuiltinType):
            if t.builtin is Builtin.UNIT and not return_pos:
                where = "a type argument" if type_arg else "a value position"
                self.add("UNIT_MISUSE", path, f"UNIT used as {where}")
        elif isinstance(t, TypeParam):
            if t.name not in scope.type_params:
                self.add("UNBOUND_TYPE_PARAM", path, f"{t.name} is not a type parameter of {scope.name}")
        elif isinstance(t, ClassType):
            target = self.p.get(t.name)
            if target is None:
                self.add("UNRESOLVED_TYPE", path, f"{t.name} is not declared")
            elif len(target.type_params) != len(t.args):
                self.add("ARITY_MISMATCH", path,
                         f"{t.name} takes {len(target.type_params)} type arguments, got {len(t.args)}")
            for i, a in enumerate(t.args):
                self.check_type(a, scope, f"{path}/args/{i}", type_arg=True)

    def run(self) -> ValidationReport:
        p = self.p
        seen: set[str] = set()
        for d in p.declarations:
            if d.name in seen:
                self.add("DUPLICATE_DECL", d.name, f"{d.name} declared more than once")
            seen.add(d.name)

        graph = {d.name: [st.target for st in d.supertypes] for d in p.declarations}
        cyclic: set[str] = set()
        for comp in _sccs(graph):
            if len(comp) > 1 or comp[0] in graph[comp[0]]:
                names = sorted(comp)
                cyclic.update(names)
                self.add("CYCLE", ",".join(names), f"inheritance cycle among {{{', '.join(names)}}}")

        for d in p.declarations:
            self.check_decl(d)
        blocking = {"UNRESOLVED_SUPERTYPE", "ARITY_MISMATCH", "DUPLICATE_DECL", "UNBOUND_TYPE_PARAM"}
        if not self.structural_only and not cyclic and not any(v.code in blocking for v in self.report):
            for d in p.declarations:
                self.check_typing(d)
        return self.report

    def check_decl(self, d: TypeDecl) -> None:
        p = self.p
        if len(set(d.type_params)) != len(d.type_params):
            self.add("DUPLICATE_TYPE_PARAM", d.name, "type parameter names repeat")
        if d.is_interface and d.modifier is not Modifier.ABSTRACT:
            self.add("INTERFACE_MODIFIER", d.name, "interfaces are implicitly abstract")

        class_supers = 0
        targets: set[str] = set()
        for i, st in enumerate(d.supertypes):
            path = f"{d.name}/supertypes/{i}"
            if st.target in targets:
                self.add("DUPLICATE_SUPERTYPE", path, f"{st.target} listed twice")
            targets.add(st.target)
            target = p.get(st.target)
            if target is None:
                self.add("UNRESOLVED_SUPERTYPE", path, f"{st.target} is not declared")
                continue
            if target.kind is Kind.CLASS:
                class_supers += 1
                if d.is_interface:
                    self.add("INTERFACE_EXTENDS_CLASS", path, f"interface {d.name} extends class {st.target}")
                if target.modifier is Modifier.FINAL:
                    self.add("FINAL_SUPERTYPE", path, f"{st.target} is final")
            self.check_type(st.as_type(), d, path)
        if class_supers > 1:
            self.add("MULTIPLE_CLASS_SUPERTYPES", d.name, f"{class_supers} class supertypes")

        names: set[str] = set()
        for m in d.methods:
            mpath = f"{d.name}/{m.name}"
            if m.name in names:
                self.add("DUPLICATE_METHOD", mpath, f"method {m.name} declared twice")
            names.add(m.name)
            if m.kind is MethodKind.ABSTRACT and not d.is_abstract:
                self.add("ABSTRACT_IN_CONCRETE", mpath, f"abstract method in non-abstract class {d.name}")
            if m.kind is MethodKind.FINAL and d.is_interface:
                self.add("FINAL_IN_INTERFACE", mpath, "interface methods cannot be final")
            pnames: set[str] = set()
            for k, prm in enumerate(m.params):
                if prm.name in pnames:
                    self.add("DUPLICATE_PARAM", f"{mpath}/params/{k}", f"parameter {prm.name} repeats")
                pnames.add(prm.name)
                self.check_type(prm.type, d, f"{mpath}/params/{k}")
            self.check_type(m.return_type, d, f"{mpath}/return", return_pos=True)
            for ref in m.overrides:
                owner = p.get(ref.decl)
                target_m = owner.method(ref.method) if owner else None
                if target_m is None:
                    self.add("DANGLING_OVERRIDE", mpath, f"overridden method {ref} does not exist")
                elif len(target_m.params) != len(m.params):
                    self.add("OVERRIDE_ARITY", mpath, f"{ref} has {len(target_m.params)} parameters")

    def check_typing(self, d: TypeDecl) -> None:
        p = self.p
        bindings = ancestor_bindings(d, p)
        for anc, paths in bindings.items():
            if any(b != paths[0] for b in paths[1:]):
                self.add("INCONSISTENT_TYPE_ARGS", d.name,
                         f"{anc} inherited with different type arguments")
        inherited = collect_method_signature_map(d, p)
        for m in d.methods:
            mpath = f"{d.name}/{m.name}"
            sig = signature_of(m)
            if sig in inherited and not m.overrides:
                self.add("MISSING_OVERRIDE", mpath, f"{sig} matches an inherited method but overrides nothing")
            for ref in m.overrides:
                owner = p.get(ref.decl)
                target_m = owner.method(ref.method) if owner else None
                if target_m is None:
                    continue
                if ref.decl not in bindings:
                    self.add("OVERRIDE_NOT_INHERITED", mpath, f"{ref.decl} is not a supertype of {d.name}")
                    continue
                if target_m.kind is MethodKind.FINAL:
                    self.add("OVERRIDES_FINAL", mpath, f"{ref} is final")
                b = bindings[ref.decl][0]
                try:
                    expected = tuple(substitute(t, b) for t in target_m.param_types)
                    expected_ret = substitute(target_m.return_type, b)
                except UnboundTypeParam:
                    continue
                if expected != m.param_types:
                    self.add("OVERRIDE_SIGNATURE", mpath,
                             f"parameters differ from {ref} seen through {d.name}")
                elif expected_ret != m.return_type:
                    self.add("OVERRIDE_RETURN", mpath, f"return type differs from {ref}")


def validate(program: IrProgram, *, structural_only: bool = False) -> ValidationReport:
    """List every invariant ``program`` violates; empty means valid."""
    return _Checker(program, structural_only).run()
