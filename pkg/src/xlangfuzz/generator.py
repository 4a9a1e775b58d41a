"""Random generation of cross-language IR programs.

Declarations are produced one at a time. Each new declaration gets a name,
a language tag, type parameters, supertypes drawn from the declarations
generated before it, fresh methods, and finally override methods chosen by
the universal override rules. Everything is a pure function of the
:class:`GenConfig` (seed included).
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass, replace
from typing import Sequence

from .ir import (
    UNIT,
    VALUE_BUILTINS,
    ClassType,
    InheritedMethods,
    IrProgram,
    Kind,
    Lang,
    MethodDecl,
    MethodKind,
    MethodSignature,
    Modifier,
    ParamDecl,
    SuperTypeRef,
    TypeDecl,
    TypeParam,
    TypeRef,
    ancestor_bindings,
    collect_method_signature_map,
)
from .overrides import (
    InterfaceMethodConfig,
    OverrideVerdict,
    apply_cant_star_adjustment,
    classify_override,
    interface_config_of,
    super_kind_of,
)

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    """A configuration value is out of range or inconsistent."""


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(parent: int, index: int) -> int:
    """Child seed for the ``index``-th job of a campaign seeded with ``parent``."""
    return splitmix64((parent & MASK64) ^ splitmix64(index & MASK64))


class Rng:
    """Seeded Mersenne Twister with a draw counter.

    ``random.Random`` seeded from an int reproduces the same stream on every
    platform, which is all determinism needs here.
    """

    algorithm = "mt19937"

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._r = random.Random(self.seed)
        self.draws = 0

    def randint(self, lo: int, hi: int) -> int:
        self.draws += 1
        return self._r.randint(lo, hi)

    def chance(self, p: float) -> bool:
        self.draws += 1
        return self._r.random() < p

    def choice(self, seq: Sequence):
        self.draws += 1
        return seq[self._r.randrange(len(seq))]

    def shuffled(self, seq: Sequence) -> list:
        self.draws += 1
        out = list(seq)
        self._r.shuffle(out)
        return out


@dataclass(frozen=True)
class GenConfig:
    decl_count_range: tuple[int, int] = (4, 12)
    parent_class_prob: float = 0.3
    interface_count_range: tuple[int, int] = (0, 3)
    type_param_count_range: tuple[int, int] = (0, 2)
    method_count_range: tuple[int, int] = (1, 3)
    param_count_range: tuple[int, int] = (0, 2)
    can_override_prob: float = 0.5
    interface_ratio: float = 0.5
    languages: tuple[Lang, ...] = (Lang.JAVA, Lang.KOTLIN)
    seed: int = 0
    # let abstract classes skip MUST overrides whose sources are all abstract
    abstract_class_exemption: bool = False
    max_retries: int = 8

    def check(self) -> None:
        for name in ("parent_class_prob", "can_override_prob", "interface_ratio"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name}={v} is not a probability")
        for name in ("decl_count_range", "interface_count_range", "type_param_count_range",
                     "method_count_range", "param_count_range"):
            lo, hi = getattr(self, name)
            if lo < 0 or lo > hi:
                raise ConfigError(f"{name}={lo}..{hi} is empty or negative")
        langs = set(self.languages)
        if Lang.JAVA not in langs or len(langs - {Lang.JAVA}) > 1:
            raise ConfigError("languages must be JAVA plus at most one other language")
        if not 0 <= self.seed <= MASK64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def with_seed(self, seed: int) -> "GenConfig":
        return replace(self, seed=seed & MASK64)


@dataclass
class NamePool:
    """Program-wide counters for fresh names (A0, I0, T0, func, arg0...)."""

    classes: int = 0
    interfaces: int = 0
    type_params: int = 0
    methods: int = 0

    @classmethod
    def from_program(cls, program: IrProgram) -> "NamePool":
        pool = cls()

        def bump(counter: str, name: str, pattern: str) -> None:
            m = re.fullmatch(pattern, name)
            if m:
                n = int(m.group(1) or 0) + 1
                setattr(pool, counter, max(getattr(pool, counter), n))

        for d in program.declarations:
            bump("classes", d.name, r"A(\d+)")
            bump("interfaces", d.name, r"I(\d+)")
            for t in d.type_params:
                bump("type_params", t, r"T(\d+)")
            for m in d.methods:
                if m.name == "func":
                    pool.methods = max(pool.methods, 1)
                bump("methods", m.name, r"func(\d+)")
        return pool

    def decl(self, kind: Kind) -> str:
        if kind is Kind.INTERFACE:
            self.interfaces += 1
            return f"I{self.interfaces - 1}"
        self.classes += 1
        return f"A{self.classes - 1}"

    def type_param(self) -> str:
        self.type_params += 1
        return f"T{self.type_params - 1}"

    def method(self) -> str:
        self.methods += 1
        return "func" if self.methods == 1 else f"func{self.methods - 1}"


# ---------------------------------------------------------------------------
# Per-declaration steps
# ---------------------------------------------------------------------------


def generate_class(names: NamePool, rng: Rng, config: GenConfig) -> TypeDecl:
    """Pick kind, name and (for classes) modifier of a fresh declaration."""
    if rng.chance(config.interface_ratio):
        return TypeDecl(names.decl(Kind.INTERFACE), Kind.INTERFACE, modifier=Modifier.ABSTRACT)
    modifier = rng.choice((Modifier.OPEN, Modifier.ABSTRACT, Modifier.FINAL))
    return TypeDecl(names.decl(Kind.CLASS), Kind.CLASS, modifier=modifier)


def random_language(rng: Rng, config: GenConfig) -> Lang:
    return rng.choice(sorted(set(config.languages), key=lambda l: l.value))


def generate_type_parameters(decl: TypeDecl, rng: Rng, config: GenConfig,
                             names: NamePool | None = None) -> tuple[str, ...]:
    names = names or NamePool()
    n = rng.randint(*config.type_param_count_range)
    return tuple(names.type_param() for _ in range(n))


def _simple_types(decl: TypeDecl, program: IrProgram) -> list[TypeRef]:
    """Non-generic types in scope: builtins, own type params, arity-0 decls."""
    pool: list[TypeRef] = list(VALUE_BUILTINS)
    pool += [TypeParam(t) for t in decl.type_params]
    pool += [ClassType(d.name) for d in program.declarations if not d.type_params]
    return pool


def _draw_args(target: TypeDecl, decl: TypeDecl, program: IrProgram, rng: Rng) -> tuple[TypeRef, ...]:
    pool = _simple_types(decl, program)
    return tuple(rng.choice(pool) for _ in target.type_params)


def _consistent(decl: TypeDecl, supertypes: Sequence[SuperTypeRef], program: IrProgram) -> bool:
    probe = replace(decl, supertypes=tuple(supertypes))
    for paths in ancestor_bindings(probe, program).values():
        if any(b != paths[0] for b in paths[1:]):
            return False
    return True


def generate_super_types(decl: TypeDecl, program: IrProgram, rng: Rng,
                         config: GenConfig) -> tuple[SuperTypeRef, ...]:
    """Choose supertypes among previously generated declarations.

    Classes get a parent class with probability ``parent_class_prob`` (final
    classes are never parents); classes and interfaces alike then take a
    number of interfaces from ``interface_count_range``. A candidate whose
    type arguments would reach some ancestor twice with different arguments
    is redrawn, up to ``max_retries`` times, and dropped after that.
    """
    chosen: list[SuperTypeRef] = []

    def pick(pool: list[TypeDecl]) -> None:
        for _ in range(config.max_retries):
            avail = [d for d in pool if all(st.target != d.name for st in chosen)]
            if not avail:
                return
            target = rng.choice(avail)
            st = SuperTypeRef(target.name, _draw_args(target, decl, program, rng))
            if _consistent(decl, chosen + [st], program):
                chosen.append(st)
                return
        log.debug("no consistent supertype for %s after %d draws", decl.name, config.max_retries)

    if decl.kind is Kind.CLASS and rng.chance(config.parent_class_prob):
        pick([d for d in program.declarations
              if d.kind is Kind.CLASS and d.modifier is not Modifier.FINAL])
    interfaces = [d for d in program.declarations if d.is_interface]
    for _ in range(rng.randint(*config.interface_count_range)):
        pick(interfaces)
    return tuple(chosen)


def _draw_type(decl: TypeDecl, program: IrProgram, rng: Rng, *, allow_unit: bool) -> TypeRef:
    candidates: list[TypeRef | TypeDecl] = list(VALUE_BUILTINS)
    candidates += [TypeParam(t) for t in decl.type_params]
    candidates += list(program.declarations)
    if decl.name not in program:
        candidates.append(decl)
    if allow_unit:
        candidates.append(UNIT)
    pick = rng.choice(candidates)
    if isinstance(pick, TypeDecl):
        return ClassType(pick.name, _draw_args(pick, decl, program, rng))
    return pick


def _method_kinds(decl: TypeDecl) -> tuple[MethodKind, ...]:
    if decl.is_interface:
        return (MethodKind.ABSTRACT, MethodKind.NORMAL)
    if decl.modifier is Modifier.ABSTRACT:
        return (MethodKind.ABSTRACT, MethodKind.FINAL, MethodKind.NORMAL)
    return (MethodKind.FINAL, MethodKind.NORMAL)


def generate_methods(decl: TypeDecl, rng: Rng, config: GenConfig,
                     program: IrProgram | None = None,
                     names: NamePool | None = None) -> tuple[MethodDecl, ...]:
    """Fresh, uniquely named methods with types drawn from what is in scope."""
    program = program or IrProgram()
    names = names or NamePool.from_program(program)
    out = []
    for _ in range(rng.randint(*config.method_count_range)):
        params = tuple(
            ParamDecl(f"arg{i}", _draw_type(decl, program, rng, allow_unit=False))
            for i in range(rng.randint(*config.param_count_range))
        )
        ret = _draw_type(decl, program, rng, allow_unit=True)
        kind = rng.choice(_method_kinds(decl))
        out.append(MethodDecl(names.method(), params, ret, kind))
    return tuple(out)


def method_that_overrides(sig: MethodSignature, inherited: InheritedMethods) -> MethodDecl:
    sources = inherited.all()
    return MethodDecl(
        name=sig.name,
        params=tuple(ParamDecl(f"arg{i}", t) for i, t in enumerate(sig.param_types)),
        return_type=sources[0].return_type,
        kind=MethodKind.NORMAL,
        overrides=tuple(s.ref for s in sources),
    )


def override_verdict(decl: TypeDecl, inherited: InheritedMethods, config: GenConfig) -> OverrideVerdict:
    verdict = classify_override(super_kind_of(inherited.method_in_super_class),
                                interface_config_of(inherited.methods_in_interfaces))
    if (config.abstract_class_exemption and verdict is OverrideVerdict.MUST
            and decl.modifier is Modifier.ABSTRACT
            and all(s.kind is MethodKind.ABSTRACT for s in inherited.all())):
        return OverrideVerdict.CAN
    return verdict


def generate_overrides(decl: TypeDecl, program: IrProgram, rng: Rng,
                       config: GenConfig) -> tuple[TypeDecl, list[MethodDecl]]:
    """Override methods for ``decl`` and the declaration after any retag.

    Classes follow the override table: MUST always overrides, CAN flips a
    coin, CANT and CANT_STAR never override (CANT_STAR also moves a Kotlin
    class to Java). Interfaces flip a coin, except when several inherited
    methods include a default one, where every language demands an override.
    """
    out: list[MethodDecl] = []
    for sig, inherited in collect_method_signature_map(decl, program).items():
        if decl.is_interface:
            conflict = interface_config_of(inherited.methods_in_interfaces) is InterfaceMethodConfig.MULTI_SOME_CONCRETE
            emit = conflict or rng.chance(config.can_override_prob)
        else:
            verdict = override_verdict(decl, inherited, config)
            if verdict is OverrideVerdict.CANT_STAR:
                decl = apply_cant_star_adjustment(decl, verdict)
            emit = verdict is OverrideVerdict.MUST or (
                verdict is OverrideVerdict.CAN and rng.chance(config.can_override_prob)
            )
        if emit:
            out.append(method_that_overrides(sig, inherited))
    return decl, out


def generate_ir_program(config: GenConfig) -> IrProgram:
    config.check()
    rng = Rng(config.seed)
    names = NamePool()
    program = IrProgram(seed=config.seed)
    for _ in range(rng.randint(*config.decl_count_range)):
        decl = generate_class(names, rng, config)
        decl = replace(decl, lang=random_language(rng, config))
        decl = replace(decl, type_params=generate_type_parameters(decl, rng, config, names))
        decl = replace(decl, supertypes=generate_super_types(decl, program, rng, config))
        decl = replace(decl, methods=generate_methods(decl, rng, config, program, names))
        decl, extra = generate_overrides(decl, program, rng, config)
        decl = replace(decl, methods=decl.methods + tuple(extra))
        program = replace(program, declarations=program.declarations + (decl,))
    return program


def generate_corpus(config: GenConfig, count: int) -> list[IrProgram]:
    """``count`` programs whose seeds are derived from ``config.seed``."""
    return [generate_ir_program(config.with_seed(derive_seed(config.seed, i))) for i in range(count)]
