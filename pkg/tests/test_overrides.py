from dataclasses import replace

from hypothesis import given, strategies as st

from oracles import load_table
from xlangfuzz.ir import Inherited, Kind, Lang, MethodDecl, MethodKind, TypeDecl
from xlangfuzz.overrides import (
    InterfaceMethodConfig,
    OverrideVerdict,
    SuperMethodKind,
    apply_cant_star_adjustment,
    classify_override,
    interface_config_of,
    super_kind_of,
)


def test_table_matches_fixture_exactly():
    table = load_table()
    assert len(table) * len(next(iter(table.values()))) == 20
    for row, cells in table.items():
        for col, verdict in cells.items():
            got = classify_override(SuperMethodKind(row), InterfaceMethodConfig(col))
            assert got.value == verdict, (row, col)


@given(st.sampled_from(list(SuperMethodKind)), st.sampled_from(list(InterfaceMethodConfig)))
def test_classify_total_and_pure(s, i):
    a = classify_override(s, i)
    assert isinstance(a, OverrideVerdict)
    assert classify_override(s, i) is a


def test_impossible_only_for_null_none():
    cells = [(s, i) for s in SuperMethodKind for i in InterfaceMethodConfig
             if classify_override(s, i) is OverrideVerdict.IMPOSSIBLE]
    assert cells == [(SuperMethodKind.NULL, InterfaceMethodConfig.NONE)]


def _inh(kind):
    return Inherited("X", MethodDecl("f", kind=kind), (), MethodDecl("f").return_type)


def test_interface_config_buckets():
    A, N = MethodKind.ABSTRACT, MethodKind.NORMAL
    assert interface_config_of([]) is InterfaceMethodConfig.NONE
    assert interface_config_of([_inh(A)]) is InterfaceMethodConfig.ONE_ABSTRACT
    assert interface_config_of([_inh(N)]) is InterfaceMethodConfig.ONE_CONCRETE
    assert interface_config_of([_inh(A), _inh(A)]) is InterfaceMethodConfig.MULTI_ALL_ABSTRACT
    assert interface_config_of([_inh(A), _inh(N)]) is InterfaceMethodConfig.MULTI_SOME_CONCRETE


def test_super_kind():
    assert super_kind_of(None) is SuperMethodKind.NULL
    for k in MethodKind:
        assert super_kind_of(_inh(k)).value == k.value


def test_cant_star_retags_only_kotlin():
    d = TypeDecl("C", Kind.CLASS, Lang.KOTLIN)
    assert apply_cant_star_adjustment(d, OverrideVerdict.CANT_STAR).lang is Lang.JAVA
    assert apply_cant_star_adjustment(d, OverrideVerdict.CANT).lang is Lang.KOTLIN
    for lang in (Lang.JAVA, Lang.GROOVY, Lang.SCALA):
        assert apply_cant_star_adjustment(replace(d, lang=lang), OverrideVerdict.CANT_STAR).lang is lang
