"""Universal override rules shared by all four target languages.

Given what a subclass inherits for one signature (at most one method from its
class parent, any number from interfaces), decide whether it must, may, or
must not declare an override. The rules are the most restrictive combination
of the per-language rules, so a program obeying them is valid everywhere,
except for one Kotlin-only conflict handled by retagging the subclass.
"""

from __future__ import annotations

from dataclasses import replace
from enum import Enum
from typing import Sequence

from .ir import Inherited, Lang, MethodKind, TypeDecl


class SuperMethodKind(Enum):
    NULL = "NULL"
    ABSTRACT = "ABSTRACT"
    FINAL = "FINAL"
    NORMAL = "NORMAL"


class InterfaceMethodConfig(Enum):
    MULTI_ALL_ABSTRACT = "MULTI_ALL_ABSTRACT"
    MULTI_SOME_CONCRETE = "MULTI_SOME_CONCRETE"
    ONE_ABSTRACT = "ONE_ABSTRACT"
    ONE_CONCRETE = "ONE_CONCRETE"
    NONE = "NONE"


class OverrideVerdict(Enum):
    MUST = "MUST"
    CAN = "CAN"
    CANT = "CANT"
    CANT_STAR = "CANT_STAR"
    IMPOSSIBLE = "IMPOSSIBLE"


_S = SuperMethodKind
_I = InterfaceMethodConfig
_V = OverrideVerdict

# rows are checked in order NULL, ABSTRACT, FINAL, NORMAL
_RULES: dict[SuperMethodKind, dict[InterfaceMethodConfig, OverrideVerdict]] = {
    _S.NULL: {
        _I.MULTI_ALL_ABSTRACT: _V.MUST,
        _I.MULTI_SOME_CONCRETE: _V.MUST,
        _I.ONE_ABSTRACT: _V.MUST,
        _I.ONE_CONCRETE: _V.CAN,
        _I.NONE: _V.IMPOSSIBLE,
    },
    _S.ABSTRACT: dict.fromkeys(_I, _V.MUST),
    _S.FINAL: {
        _I.MULTI_ALL_ABSTRACT: _V.CANT,
        _I.MULTI_SOME_CONCRETE: _V.CANT_STAR,
        _I.ONE_ABSTRACT: _V.CANT,
        _I.ONE_CONCRETE: _V.CANT_STAR,
        _I.NONE: _V.CANT,
    },
    _S.NORMAL: {
        _I.MULTI_ALL_ABSTRACT: _V.CAN,
        _I.MULTI_SOME_CONCRETE: _V.MUST,
        _I.ONE_ABSTRACT: _V.CAN,
        _I.ONE_CONCRETE: _V.MUST,
        _I.NONE: _V.CAN,
    },
}


def classify_override(
    super_kind: SuperMethodKind, iface_config: InterfaceMethodConfig
) -> OverrideVerdict:
    return _RULES[super_kind][iface_config]


def super_kind_of(method: Inherited | None) -> SuperMethodKind:
    if method is None:
        return SuperMethodKind.NULL
    return SuperMethodKind(method.kind.value)


def interface_config_of(methods: Sequence[Inherited]) -> InterfaceMethodConfig:
    """Bucket interface methods by count and by whether any has a body.

    NORMAL interface methods are default methods, i.e. concrete.
    """
    if not methods:
        return InterfaceMethodConfig.NONE
    concrete = any(m.kind is MethodKind.NORMAL for m in methods)
    if len(methods) == 1:
        return InterfaceMethodConfig.ONE_CONCRETE if concrete else InterfaceMethodConfig.ONE_ABSTRACT
    if concrete:
        return InterfaceMethodConfig.MULTI_SOME_CONCRETE
    return InterfaceMethodConfig.MULTI_ALL_ABSTRACT


def apply_cant_star_adjustment(decl: TypeDecl, verdict: OverrideVerdict) -> TypeDecl:
    """Move a Kotlin subclass to Java when it hits the final-vs-default conflict.

    Kotlin rejects a class whose parent's final method collides with a default
    interface method, whether or not the class overrides; Java, Groovy and
    Scala subclasses are left alone.
    """
    if verdict is OverrideVerdict.CANT_STAR and decl.lang is Lang.KOTLIN:
        return replace(decl, lang=Lang.JAVA)
    return decl
