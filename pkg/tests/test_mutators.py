import copy

import pytest
from hypothesis import given, strategies as st

from xlangfuzz.fixtures import FIXTURES
from xlangfuzz.generator import GenConfig, Rng, generate_ir_program
from xlangfuzz.ir import Lang, from_dict, record_from_json, record_to_json, to_dict, to_json
from xlangfuzz.mutators import (
    ALL_MUTATORS,
    FUNCTION_REMOVAL,
    LANG_SHUFFLER,
    MUTATORS,
    SUPERTYPE_ORDER,
    TYPE_CHANGER,
    NoMutationPossible,
    invert,
    mutate,
    remove_method,
    replay,
    type_at,
)
from xlangfuzz.validation import validate

seeds = st.integers(0, 2**64 - 1)


def strip(doc):
    doc = copy.deepcopy(doc)
    doc.pop("provenance", None)
    return doc


def leaf_diff(a, b, path=""):
    """JSON pointers where two documents differ; a length change reports the list itself."""
    if type(a) is not type(b):
        return [path]
    if isinstance(a, dict):
        out = []
        for k in sorted(set(a) | set(b)):
            if k not in a or k not in b:
                out.append(f"{path}/{k}")
            else:
                out += leaf_diff(a[k], b[k], f"{path}/{k}")
        return out
    if isinstance(a, list):
        if len(a) != len(b):
            return [path]
        out = []
        for i, (x, y) in enumerate(zip(a, b)):
            out += leaf_diff(x, y, f"{path}/{i}")
        return out
    return [] if a == b else [path]


def lookup(doc, pointer):
    for part in pointer.strip("/").split("/"):
        doc = doc[int(part)] if isinstance(doc, list) else doc[part]
    return doc


def delete(doc, pointer):
    *head, last = pointer.strip("/").split("/")
    parent = lookup(doc, "/".join(head)) if head else doc
    del parent[int(last)]


def check_diff(before, after, rec):
    b, a = strip(to_dict(before)), strip(to_dict(after))
    assert lookup(b, rec.path) == rec.before
    diffs = leaf_diff(b, a)
    assert diffs, "mutation changed nothing"
    if rec.after is None:
        # a deletion plus its repairs: redo them by hand and compare
        expect = copy.deepcopy(b)
        delete(expect, rec.path)
        for path, _, _ in rec.repairs:
            delete(expect, path)
        assert expect == a
        allowed = {rec.path.rsplit("/", 1)[0]} | {p.rsplit("/", 1)[0] for p, _, _ in rec.repairs}
        assert set(diffs) <= allowed
    else:
        assert lookup(a, rec.path) == rec.after
        assert rec.repairs == ()
        for d in diffs:
            assert d == rec.path or d.startswith(rec.path + "/"), (d, rec.path)


def program_of(seed, langs=(Lang.JAVA, Lang.KOTLIN)):
    return generate_ir_program(GenConfig(languages=langs, decl_count_range=(3, 10)).with_seed(seed))


@given(seeds, st.sampled_from(ALL_MUTATORS), st.integers(0, 2**32))
def test_single_mutation_structural_and_local(seed, which, mseed):
    p = program_of(seed)
    try:
        m, rec = mutate(p, Rng(mseed), (which,))
    except NoMutationPossible:
        return
    assert rec.mutator == which
    assert validate(m, structural_only=True) == []
    check_diff(p, m, rec)
    assert m.provenance == (rec,)


@given(seeds, st.integers(0, 2**32))
def test_invert_restores_original(seed, mseed):
    p = program_of(seed)
    try:
        m, rec = mutate(p, Rng(mseed), ALL_MUTATORS)
    except NoMutationPossible:
        return
    assert to_json(invert(m, rec)) == to_json(p)


@given(seeds, st.integers(0, 2**32))
def test_replay_reproduces_mutant(seed, mseed):
    p = program_of(seed)
    try:
        m, rec = mutate(p, Rng(mseed), ALL_MUTATORS)
    except NoMutationPossible:
        return
    rec2 = record_from_json(record_to_json(rec))
    assert to_json(replay(p, rec2)) == to_json(m)


@given(seeds, st.integers(0, 2**32))
def test_supertype_order_keeps_set(seed, mseed):
    p = program_of(seed)
    try:
        m, rec = MUTATORS[SUPERTYPE_ORDER](p, Rng(mseed))
    except NoMutationPossible:
        return
    d0, d1 = p[rec.decl], m[rec.decl]
    assert set(d0.supertypes) == set(d1.supertypes)
    assert d0.supertypes != d1.supertypes


@given(seeds, st.integers(0, 2**32))
def test_lang_shuffler_keeps_two_languages(seed, mseed):
    langs = (Lang.JAVA, Lang.SCALA)
    p = program_of(seed, langs)
    m, rec = mutate(p, Rng(mseed), (LANG_SHUFFLER,), langs)
    assert m.languages() <= set(langs)
    assert m[rec.decl].lang is not p[rec.decl].lang


@given(seeds, st.integers(0, 2**32))
def test_type_changer_site_recorded(seed, mseed):
    p = program_of(seed)
    try:
        m, rec = mutate(p, Rng(mseed), (TYPE_CHANGER,))
    except NoMutationPossible:
        return
    assert type_at(m, rec.path) != type_at(p, rec.path)
    assert rec.site


def test_function_removal_drops_dangling_overrides():
    p = FIXTURES["fig7b"].program
    m, rec = remove_method(p, "A1", "func")
    assert m["B1"].method("func").overrides == ()
    assert validate(m, structural_only=True) == []
    assert to_json(invert(m, rec)) == to_json(p)


def test_function_removal_same_decl_repair_indices():
    p = FIXTURES["fig12"].program
    m, rec = remove_method(p, "I0", "func")
    assert validate(m, structural_only=True) == []
    check_diff(p, m, rec)
    assert to_json(invert(m, rec)) == to_json(p)


def test_mutation_is_deterministic():
    p = program_of(3)
    a = mutate(p, Rng(9), ALL_MUTATORS)
    b = mutate(p, Rng(9), ALL_MUTATORS)
    assert a == b


def test_no_mutation_possible():
    from xlangfuzz.ir import IrProgram
    with pytest.raises(NoMutationPossible):
        mutate(IrProgram(), Rng(0), (FUNCTION_REMOVAL, SUPERTYPE_ORDER))


def test_leaf_diff_helper():
    assert leaf_diff({"a": [1, 2]}, {"a": [1, 3]}) == ["/a/1"]
    assert leaf_diff({"a": [1, 2]}, {"a": [1]}) == ["/a"]
    assert from_dict(to_dict(program_of(1))) == program_of(1)
