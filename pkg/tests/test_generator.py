from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from oracles import conformance_violations, unimplemented_abstract
from xlangfuzz.fixtures import FIXTURES
from xlangfuzz.generator import (
    ConfigError,
    GenConfig,
    NamePool,
    Rng,
    derive_seed,
    generate_corpus,
    generate_ir_program,
    generate_overrides,
)
from xlangfuzz.ir import Kind, Lang, MethodRef, Modifier, SuperTypeRef, to_json
from xlangfuzz.validation import validate

seeds = st.integers(0, 2**64 - 1)
language_sets = st.sampled_from([
    (Lang.JAVA,), (Lang.JAVA, Lang.KOTLIN), (Lang.JAVA, Lang.GROOVY), (Lang.JAVA, Lang.SCALA),
])


@given(seeds)
def test_same_seed_same_program(seed):
    cfg = GenConfig().with_seed(seed)
    assert to_json(generate_ir_program(cfg)) == to_json(generate_ir_program(cfg))


def test_different_seeds_differ():
    texts = {to_json(generate_ir_program(GenConfig().with_seed(s))) for s in range(20)}
    assert len(texts) == 20


@given(seeds, language_sets, st.booleans())
def test_generated_programs_valid_and_conformant(seed, langs, exempt):
    cfg = GenConfig(languages=langs, abstract_class_exemption=exempt,
                    decl_count_range=(4, 14), parent_class_prob=0.6).with_seed(seed)
    p = generate_ir_program(cfg)
    assert validate(p) == []
    assert conformance_violations(p, abstract_exemption=exempt) == []
    assert unimplemented_abstract(p) == []


@given(seeds, language_sets)
def test_language_tags_within_config(seed, langs):
    p = generate_ir_program(GenConfig(languages=langs).with_seed(seed))
    assert p.languages() <= set(langs)


@given(seeds)
def test_decl_count_in_range(seed):
    cfg = GenConfig(decl_count_range=(2, 5)).with_seed(seed)
    assert 2 <= len(generate_ir_program(cfg).declarations) <= 5


def test_interfaces_only_extend_interfaces():
    for s in range(200):
        p = generate_ir_program(GenConfig().with_seed(s))
        for d in p.declarations:
            if d.is_interface:
                assert all(p[t.target].is_interface for t in d.supertypes)


def test_corpus_uses_derived_seeds():
    corpus = generate_corpus(GenConfig(seed=5), 3)
    assert [p.seed for p in corpus] == [derive_seed(5, i) for i in range(3)]


def test_derive_seed_distinct():
    assert len({derive_seed(1, i) for i in range(1000)}) == 1000


@pytest.mark.parametrize("bad", [
    dict(parent_class_prob=1.5),
    dict(can_override_prob=-0.1),
    dict(decl_count_range=(5, 2)),
    dict(method_count_range=(-1, 2)),
    dict(languages=(Lang.KOTLIN,)),
    dict(languages=(Lang.JAVA, Lang.KOTLIN, Lang.SCALA)),
    dict(seed=-1),
])
def test_config_rejected(bad):
    with pytest.raises(ConfigError):
        generate_ir_program(GenConfig(**bad))


def test_zero_declarations():
    p = generate_ir_program(GenConfig(decl_count_range=(0, 0)))
    assert p.declarations == ()


def test_cant_star_retags_kotlin_subclass():
    p = FIXTURES["fig2"].program
    base = replace(p, declarations=p.declarations[:2])
    child = replace(p["C"], methods=())
    decl, extra = generate_overrides(child, base, Rng(0), GenConfig())
    assert decl.lang is Lang.JAVA
    assert extra == []


def test_must_override_generated_for_conflicting_defaults():
    p = FIXTURES["fig7b"].program
    base = replace(p, declarations=p.declarations[:2])
    decl, extra = generate_overrides(replace(p["C1"], methods=()), base, Rng(0), GenConfig())
    (m,) = extra
    assert m.overrides == (MethodRef("A1", "func"), MethodRef("B1", "func"))


def test_interface_resolves_default_conflict():
    # two unrelated interfaces with defaults of the same signature, one sub-interface
    p = FIXTURES["fig11"].program
    i0 = p["I0"]
    i1 = replace(i0, name="I1")
    sub = replace(i0, name="I2", methods=(), supertypes=(
        SuperTypeRef("I0"), SuperTypeRef("I1")))
    base = replace(p, declarations=(i0, i1))
    for seed in range(5):
        _, extra = generate_overrides(sub, base, Rng(seed), GenConfig(can_override_prob=0.0))
        assert len(extra) == 1


def test_name_pool_resumes_after_program():
    pool = NamePool.from_program(FIXTURES["fig3"].program)
    assert pool.decl(Kind.CLASS) == "A4"
    assert pool.decl(Kind.INTERFACE) == "I2"


def test_final_classes_never_parents():
    for s in range(200):
        p = generate_ir_program(GenConfig(parent_class_prob=1.0).with_seed(s))
        for d in p.declarations:
            for t in d.supertypes:
                assert p[t.target].modifier is not Modifier.FINAL or p[t.target].is_interface
