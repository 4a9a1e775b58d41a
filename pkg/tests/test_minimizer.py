import json
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from mocks import mock_pair
from synthetic import synthetic_cases
from xlangfuzz.fixtures import FIXTURES
from xlangfuzz.generator import GenConfig, generate_ir_program
from xlangfuzz.harness import CompileOutcome, Mode, Result, Status, TestVerdict, differential_test
from xlangfuzz.ir import (
    IrProgram,
    Kind,
    Lang,
    MethodDecl,
    SuperTypeRef,
    TypeDecl,
    language_switch_complexity,
    to_json,
)
from xlangfuzz.minimizer import (
    PRIORITY,
    OracleDrift,
    PassKind,
    ReductionPass,
    apply_pass,
    bundle_oracle,
    candidates,
    flatten_keeps_complexity,
    flatten_language,
    minimize,
    predicate_oracle,
    remove_decl,
    remove_type_param,
    replay_trail,
    size_measure,
    write_result,
)
from xlangfuzz.validation import validate

CASES = synthetic_cases()


def still_triggers(oracle, start, program):
    v = oracle(program)
    return v.result is start.result and v.fingerprint == start.fingerprint


def assert_one_minimal(result, oracle, passes=PRIORITY):
    for kind in passes:
        for p in candidates(result.minimized, kind):
            cand = apply_pass(result.minimized, p)
            if validate(cand, structural_only=True):
                continue
            assert not still_triggers(oracle, result.verdict, cand), f"{p} still reproduces"


@pytest.mark.parametrize("label,pred,program", CASES, ids=[c[0] for c in CASES])
def test_synthetic_oracle_one_minimal(label, pred, program):
    before = to_json(program)
    oracle = predicate_oracle(pred)
    result = minimize(program, oracle, budget=10_000)
    assert not result.budget_exhausted
    assert pred(result.minimized)
    assert to_json(program) == before
    assert validate(result.minimized, structural_only=True) == []
    assert_one_minimal(result, oracle)
    assert all(a <= b for a, b in zip(size_measure(result.minimized), size_measure(program)))


@pytest.mark.parametrize("label,pred,program", CASES[::5], ids=[c[0] for c in CASES[::5]])
def test_rollbacks_restore_exact_state(label, pred, program):
    result = minimize(program, predicate_oracle(pred), budget=10_000)
    state = program
    for p, kept in result.trail:
        before = to_json(state)
        nxt = replay_trail(state, [(p, kept)])
        if kept:
            state = nxt
        else:
            assert to_json(nxt) == before
    assert to_json(state) == to_json(result.minimized)
    assert to_json(replay_trail(program, result.trail)) == to_json(result.minimized)


def test_a2_with_one_method():
    cfg = GenConfig(decl_count_range=(6, 6))
    pred = lambda p: p.get("A2") is not None and len(p["A2"].methods) >= 1
    seeds = [s for s in range(200) if pred(generate_ir_program(cfg.with_seed(s)))][:5]
    assert seeds
    for s in seeds:
        result = minimize(generate_ir_program(cfg.with_seed(s)), predicate_oracle(pred))
        (d,) = result.minimized.declarations
        assert d.name == "A2" and len(d.methods) == 1


def test_already_minimal_unchanged():
    p = IrProgram((TypeDecl("A0", Kind.CLASS, methods=(MethodDecl("func"),)),))
    result = minimize(p, predicate_oracle(lambda q: any(d.methods for d in q.declarations)))
    assert to_json(result.minimized) == to_json(p)
    assert result.kept == []


def test_minimize_is_idempotent():
    label, pred, program = CASES[7]
    once = minimize(program, predicate_oracle(pred))
    twice = minimize(once.minimized, predicate_oracle(pred))
    assert twice.kept == []


def test_drift_raises():
    with pytest.raises(OracleDrift):
        minimize(FIXTURES["fig2"].program, predicate_oracle(lambda p: False))


def test_drift_on_fingerprint_mismatch():
    p = FIXTURES["fig2"].program
    expected = predicate_oracle(lambda q: True, "other")(p)
    with pytest.raises(OracleDrift):
        minimize(p, predicate_oracle(lambda q: True), expected=expected)


def test_budget_counts_oracle_calls():
    calls = []
    base = predicate_oracle(lambda p: len(p.declarations) >= 1)

    def counting(p):
        calls.append(1)
        return base(p)

    result = minimize(generate_ir_program(GenConfig().with_seed(3)), counting, budget=4)
    assert result.budget_exhausted
    assert result.oracle_calls == len(calls) <= 4


def _verdict(fp):
    o = CompileOutcome(Status.REJECT, 1, fp, 0, fp, "synthetic")
    return TestVerdict(Mode.NORMAL, Result.NORMAL_REJECT, (o,))


_OK = TestVerdict(Mode.NORMAL, Result.OK, (CompileOutcome(Status.PASS, 0, "", 0, "", "synthetic"),))


def test_fork_recorded():
    # bug "a" needs A1; without A1 but with A2 a different bug "b" shows up
    def oracle(p):
        if "A1" in p:
            return _verdict("a")
        if "A2" in p:
            return _verdict("b")
        return _OK

    p = FIXTURES["fig3"].program
    result = minimize(p, oracle)
    assert "A1" in result.minimized
    assert [f.verdict.fingerprint for f in result.forked_findings] == ["b"]
    fork = result.forked_findings[0]
    assert "A1" not in fork.program and fork.via.kind is PassKind.REMOVE_DECL


def test_reorder_explored_never_kept():
    def oracle(p):
        d = p.get("A3")
        if d is not None and len(d.supertypes) >= 2 and d.supertypes[0].target == "A2":
            return _verdict("a")
        if d is not None:
            return _verdict("order")
        return _OK

    p = FIXTURES["fig3"].program
    plain = minimize(p, oracle)
    explored = minimize(p, oracle, explore_reorder=True)
    assert to_json(plain.minimized) == to_json(explored.minimized)
    reorders = [(q, k) for q, k in explored.trail if q.kind is PassKind.REORDER_SUPERTYPES]
    assert reorders and not any(k for _, k in reorders)
    assert all(q.kind is not PassKind.REORDER_SUPERTYPES for q, _ in plain.trail)


def _chain(*langs):
    return IrProgram(tuple(
        TypeDecl(f"A{i}", Kind.CLASS, l, supertypes=(SuperTypeRef(f"A{i-1}"),) if i else ())
        for i, l in enumerate(langs)
    ))


def test_flatten_java_kotlin_java():
    p = _chain(Lang.JAVA, Lang.KOTLIN, Lang.JAVA)
    assert language_switch_complexity(p) == 2
    assert language_switch_complexity(flatten_language(p, "A1")) == 0


def test_flatten_can_raise_complexity_and_is_guarded():
    p = _chain(Lang.KOTLIN, Lang.KOTLIN, Lang.KOTLIN)
    assert language_switch_complexity(p) == 0
    assert language_switch_complexity(flatten_language(p, "A1")) == 2
    assert not flatten_keeps_complexity(p, "A1")
    # from an all-Kotlin chain every single flattening adds a switch
    assert candidates(p, PassKind.FLATTEN_LANGUAGE) == []
    q = _chain(Lang.JAVA, Lang.KOTLIN, Lang.KOTLIN)
    assert [c.target for c in candidates(q, PassKind.FLATTEN_LANGUAGE)] == ["A1"]


@given(st.integers(0, 2**64 - 1), st.lists(st.integers(0, 20), max_size=6))
def test_guarded_flatten_sequence_monotone(seed, picks):
    p = generate_ir_program(GenConfig(decl_count_range=(3, 10)).with_seed(seed))
    for k in picks:
        cands = candidates(p, PassKind.FLATTEN_LANGUAGE)
        if not cands:
            break
        before = language_switch_complexity(p)
        p = apply_pass(p, cands[k % len(cands)])
        assert language_switch_complexity(p) <= before


@given(st.integers(0, 2**64 - 1))
def test_every_pass_keeps_structure_or_is_skipped(seed):
    p = generate_ir_program(GenConfig(decl_count_range=(3, 8)).with_seed(seed))
    for kind in PRIORITY:
        for c in candidates(p, kind)[:10]:
            q = apply_pass(p, c)
            if kind in (PassKind.REMOVE_METHOD, PassKind.REMOVE_DECL, PassKind.REMOVE_TYPE_PARAM,
                        PassKind.FLATTEN_LANGUAGE):
                assert validate(q, structural_only=True) == [], c


def test_remove_type_param_updates_uses():
    p = FIXTURES["fig7a"].program
    q = remove_type_param(p, "A", "T")
    assert q["A"].type_params == ()
    assert q["B"].supertypes[0].args == ()
    assert validate(q, structural_only=True) == []


def test_remove_decl_erases_references():
    p = FIXTURES["fig9"].program
    q = remove_decl(p, "A1")
    assert "A1" not in q
    assert q["A2"].supertypes == ()
    assert validate(q, structural_only=True) == []


def test_pass_json_round_trip():
    p = ReductionPass(PassKind.REPLACE_CUSTOM_TYPE, "/declarations/0/methods/0/return", "TOP")
    assert ReductionPass.from_json(json.loads(json.dumps(p.to_json()))) == p


def test_fig7a_type_param_removal_rolled_back(tmp_path):
    f = FIXTURES["fig7a"]
    latest_rules, earlier_rules = f.mock_rules()
    pair = mock_pair(tmp_path, f.varied, latest_rules, earlier_rules)
    oracle = bundle_oracle(lambda b: differential_test(b, pair))
    result = minimize(f.program, oracle, budget=200)
    tried = [(p, k) for p, k in result.trail if p.kind is PassKind.REMOVE_TYPE_PARAM]
    assert (ReductionPass(PassKind.REMOVE_TYPE_PARAM, "A/T"), False) in tried
    assert result.minimized["A"].type_params == ("T",)
    assert result.verdict.result is Result.DISCREPANCY

    out = write_result(result, tmp_path / "min")
    assert (out / "trail.json").exists() and (out / "src" / "C.groovy").exists()
    trail = json.loads((out / "trail.json").read_text())
    assert {"kind": "REMOVE_TYPE_PARAM", "target": "A/T", "arg": None, "kept": False} in trail


def test_structurally_invalid_candidates_skip_oracle():
    seen = []
    pred = lambda p: "A1" in p

    def oracle(p):
        seen.append(p)
        return predicate_oracle(pred)(p)

    minimize(FIXTURES["fig9"].program, oracle)
    assert all(validate(p, structural_only=True) == [] for p in seen)


def test_replace_custom_type_prefers_string():
    p = FIXTURES["fig9"].program
    cands = candidates(p, PassKind.REPLACE_CUSTOM_TYPE)
    assert [c.arg for c in cands[:2]] == ["STRING", "TOP"]
    assert cands[0].target == cands[1].target


def test_priority_order():
    assert PRIORITY == (PassKind.REMOVE_METHOD, PassKind.FLATTEN_LANGUAGE, PassKind.REPLACE_CUSTOM_TYPE,
                        PassKind.CONCRETIZE_TYPE_PARAM, PassKind.REMOVE_TYPE_PARAM, PassKind.REMOVE_DECL)


def test_trail_order_restarts_after_keep():
    label, pred, program = CASES[0]
    result = minimize(program, predicate_oracle(pred))
    # after each kept step the next probe is of the highest-priority kind with candidates
    for i, (p, kept) in enumerate(result.trail[:-1]):
        if kept:
            state = replay_trail(program, result.trail[: i + 1])
            first_kind = next(k for k in PRIORITY if candidates(state, k))
            assert result.trail[i + 1][0].kind is first_kind


def test_fixture_bug_programs_survive_with_renamed_copy():
    p = FIXTURES["fig2"].program
    q = replace(p, declarations=p.declarations[::-1])
    assert validate(q, structural_only=True) == []
