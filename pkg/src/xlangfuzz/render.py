"""Source emitters for Java, Kotlin, Groovy and Scala.

Each declaration becomes one file in the language named by its tag. Method
bodies only return a default value, because the IR has no expressions.

By default Kotlin types are written nullable (``String?``, ``T?``) so that a
``null`` return compiles and Kotlin signatures line up with the boxed types
Java sees. ``RenderOptions(kotlin_nullable=False)`` writes plain types and
throwing bodies instead, which reads closer to hand-written Kotlin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .ir import (
    Builtin,
    BuiltinType,
    ClassType,
    IrProgram,
    Lang,
    MethodDecl,
    MethodKind,
    Modifier,
    TypeDecl,
    TypeParam,
    TypeRef,
    superclass,
)

EXTENSIONS = {Lang.JAVA: "java", Lang.KOTLIN: "kt", Lang.GROOVY: "groovy", Lang.SCALA: "scala"}
LANG_OF_EXTENSION = {v: k for k, v in EXTENSIONS.items()}

INDENT = "    "


class UnrenderableConstruct(ValueError):
    pass


@dataclass(frozen=True)
class RenderOptions:
    kotlin_nullable: bool = True


@dataclass(frozen=True)
class SourceFile:
    path: str
    lang: Lang
    text: str


@dataclass(frozen=True)
class SourceBundle:
    files: tuple[SourceFile, ...] = ()
    entry: dict[str, str] = field(default_factory=dict)

    def languages(self) -> set[Lang]:
        return {f.lang for f in self.files}

    def by_lang(self, *langs: Lang) -> list[SourceFile]:
        return [f for f in self.files if f.lang in langs]

    def manifest(self) -> dict:
        return {
            "files": [{"path": f.path, "lang": f.lang.value} for f in self.files],
            "entry": dict(self.entry),
        }


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

_JAVA_BUILTINS = {Builtin.TOP: "Object", Builtin.STRING: "String", Builtin.INT: "Integer", Builtin.UNIT: "void"}
_KOTLIN_BUILTINS = {Builtin.TOP: "Any", Builtin.STRING: "String", Builtin.INT: "Int", Builtin.UNIT: "Unit"}
_SCALA_BUILTINS = {Builtin.TOP: "AnyRef", Builtin.STRING: "String", Builtin.INT: "Integer", Builtin.UNIT: "Unit"}


def java_type(t: TypeRef) -> str:
    if isinstance(t, BuiltinType):
        return _JAVA_BUILTINS[t.builtin]
    if isinstance(t, TypeParam):
        return t.name
    if not t.args:
        return t.name
    return f"{t.name}<{', '.join(java_type(a) for a in t.args)}>"


def kotlin_type(t: TypeRef, nullable: bool) -> str:
    if isinstance(t, BuiltinType):
        base = _KOTLIN_BUILTINS[t.builtin]
        if t.builtin is Builtin.UNIT:
            return base
    elif isinstance(t, TypeParam):
        base = t.name
    elif t.args:
        base = f"{t.name}<{', '.join(kotlin_type(a, nullable) for a in t.args)}>"
    else:
        base = t.name
    return base + "?" if nullable else base


def scala_type(t: TypeRef) -> str:
    if isinstance(t, BuiltinType):
        return _SCALA_BUILTINS[t.builtin]
    if isinstance(t, TypeParam):
        return t.name
    if not t.args:
        return t.name
    return f"{t.name}[{', '.join(scala_type(a) for a in t.args)}]"


def _is_unit(t: TypeRef) -> bool:
    return isinstance(t, BuiltinType) and t.builtin is Builtin.UNIT


# ---------------------------------------------------------------------------
# Java and Groovy (Groovy accepts the same syntax for this subset)
# ---------------------------------------------------------------------------


def _java_method(m: MethodDecl, decl: TypeDecl) -> list[str]:
    ret = java_type(m.return_type)
    params = ", ".join(f"{java_type(p.type)} {p.name}" for p in m.params)
    sig = f"{ret} {m.name}({params})"
    body = "{}" if _is_unit(m.return_type) else "{\n" + INDENT * 2 + "return null;\n" + INDENT + "}"
    lines = [INDENT + "@Override"] if m.overrides else []
    if decl.is_interface:
        if m.kind is MethodKind.ABSTRACT:
            lines.append(f"{INDENT}{sig};")
        else:
            lines.append(f"{INDENT}default {sig} {body}")
    elif m.kind is MethodKind.ABSTRACT:
        lines.append(f"{INDENT}public abstract {sig};")
    elif m.kind is MethodKind.FINAL:
        lines.append(f"{INDENT}public final {sig} {body}")
    else:
        lines.append(f"{INDENT}public {sig} {body}")
    return lines


def _java_decl(decl: TypeDecl, program: IrProgram) -> str:
    tparams = f"<{', '.join(decl.type_params)}>" if decl.type_params else ""
    if decl.is_interface:
        head = f"public interface {decl.name}{tparams}"
        if decl.supertypes:
            head += " extends " + ", ".join(java_type(st.as_type()) for st in decl.supertypes)
    else:
        mod = {Modifier.OPEN: "", Modifier.FINAL: "final ", Modifier.ABSTRACT: "abstract "}[decl.modifier]
        head = f"public {mod}class {decl.name}{tparams}"
        sc = superclass(decl, program)
        if sc is not None:
            head += f" extends {java_type(sc.as_type())}"
        ifaces = [st for st in decl.supertypes if st is not sc]
        if ifaces:
            head += " implements " + ", ".join(java_type(st.as_type()) for st in ifaces)
    body = [line for m in decl.methods for line in _java_method(m, decl)]
    return "\n".join([head + " {", *body, "}"]) + "\n"


# ---------------------------------------------------------------------------
# Kotlin
# ---------------------------------------------------------------------------


def _kotlin_method(m: MethodDecl, decl: TypeDecl, opts: RenderOptions) -> str:
    nullable = opts.kotlin_nullable
    params = ", ".join(f"{p.name}: {kotlin_type(p.type, nullable)}" for p in m.params)
    ret = "" if _is_unit(m.return_type) else f": {kotlin_type(m.return_type, nullable)}"
    sig = f"fun {m.name}({params}){ret}"
    if _is_unit(m.return_type):
        body = " {}"
    elif nullable:
        body = " = null"
    else:
        body = " = throw UnsupportedOperationException()"
    override = "override " if m.overrides else ""
    if decl.is_interface:
        if m.kind is MethodKind.ABSTRACT:
            return f"{INDENT}{override}{sig}"
        return f"{INDENT}{override}{sig}{body}"
    if m.kind is MethodKind.ABSTRACT:
        return f"{INDENT}abstract {override}{sig}"
    if m.kind is MethodKind.FINAL:
        return f"{INDENT}{'final ' if m.overrides else ''}{override}{sig}{body}"
    if m.overrides:
        return f"{INDENT}{override}{sig}{body}"
    open_ = "" if decl.modifier is Modifier.FINAL else "open "
    return f"{INDENT}{open_}{sig}{body}"


def _kotlin_decl(decl: TypeDecl, program: IrProgram, opts: RenderOptions) -> str:
    tparams = f"<{', '.join(decl.type_params)}>" if decl.type_params else ""
    if decl.is_interface:
        head = f"interface {decl.name}{tparams}"
    else:
        mod = {Modifier.OPEN: "open ", Modifier.FINAL: "", Modifier.ABSTRACT: "abstract "}[decl.modifier]
        head = f"{mod}class {decl.name}{tparams}"
    sc = superclass(decl, program)
    supers = []
    for st in decl.supertypes:
        # supertype arguments are written without '?': the type parameters of
        # the target already admit nullable arguments
        t = kotlin_type(st.as_type(), False) if not opts.kotlin_nullable else _kotlin_super(st.as_type())
        supers.append(t + "()" if st is sc else t)
    if supers:
        head += " : " + ", ".join(supers)
    if not decl.methods:
        return head + "\n"
    body = [_kotlin_method(m, decl, opts) for m in decl.methods]
    return "\n".join([head + " {", *body, "}"]) + "\n"


def _kotlin_super(t: ClassType) -> str:
    if not t.args:
        return t.name
    return f"{t.name}<{', '.join(kotlin_type(a, True) for a in t.args)}>"


# ---------------------------------------------------------------------------
# Scala
# ---------------------------------------------------------------------------


def _scala_default(t: TypeRef) -> str:
    if _is_unit(t):
        return "{}"
    if isinstance(t, TypeParam):
        return f"null.asInstanceOf[{t.name}]"
    return "null"


def _scala_method(m: MethodDecl, decl: TypeDecl) -> str:
    params = ", ".join(f"{p.name}: {scala_type(p.type)}" for p in m.params)
    sig = f"def {m.name}({params}): {scala_type(m.return_type)}"
    override = "override " if m.overrides else ""
    if m.kind is MethodKind.ABSTRACT:
        return f"{INDENT}{sig}"
    final = "final " if m.kind is MethodKind.FINAL else ""
    return f"{INDENT}{final}{override}{sig} = {_scala_default(m.return_type)}"


def _scala_decl(decl: TypeDecl, program: IrProgram) -> str:
    tparams = f"[{', '.join(decl.type_params)}]" if decl.type_params else ""
    if decl.is_interface:
        head = f"trait {decl.name}{tparams}"
    else:
        mod = {Modifier.OPEN: "", Modifier.FINAL: "final ", Modifier.ABSTRACT: "abstract "}[decl.modifier]
        head = f"{mod}class {decl.name}{tparams}"
    sc = superclass(decl, program)
    # a class parent has to come first; traits keep their relative order
    ordered = ([sc] if sc else []) + [st for st in decl.supertypes if st is not sc]
    if ordered:
        head += " extends " + " with ".join(scala_type(st.as_type()) for st in ordered)
    if not decl.methods:
        return head + "\n"
    body = [_scala_method(m, decl) for m in decl.methods]
    return "\n".join([head + " {", *body, "}"]) + "\n"


# ---------------------------------------------------------------------------


def render_decl(decl: TypeDecl, program: IrProgram, options: RenderOptions = RenderOptions()) -> str:
    if decl.lang in (Lang.JAVA, Lang.GROOVY):
        return _java_decl(decl, program)
    if decl.lang is Lang.KOTLIN:
        return _kotlin_decl(decl, program, options)
    if decl.lang is Lang.SCALA:
        return _scala_decl(decl, program)
    raise UnrenderableConstruct(f"no emitter for {decl.lang}")


def render(program: IrProgram, options: RenderOptions = RenderOptions()) -> SourceBundle:
    files = []
    entry = {}
    for d in program.declarations:
        path = f"{d.name}.{EXTENSIONS[d.lang]}"
        files.append(SourceFile(path, d.lang, render_decl(d, program, options)))
        entry[d.name] = path
    return SourceBundle(tuple(files), entry)


def write_bundle(bundle: SourceBundle, root: Path) -> Path:
    """Lay the bundle out as ``root/src/<file>`` plus ``root/bundle.json``."""
    root = Path(root)
    src = root / "src"
    src.mkdir(parents=True, exist_ok=True)
    for f in bundle.files:
        (src / f.path).write_text(f.text)
    (root / "bundle.json").write_text(json.dumps(bundle.manifest(), indent=2) + "\n")
    return root


def read_bundle(root: Path) -> SourceBundle:
    root = Path(root)
    manifest = json.loads((root / "bundle.json").read_text())
    files = tuple(
        SourceFile(f["path"], Lang(f["lang"]), (root / "src" / f["path"]).read_text())
        for f in manifest["files"]
    )
    return SourceBundle(files, manifest["entry"])
