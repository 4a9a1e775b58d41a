import os
import sys
import time
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from mocks import PASS_ALL, mock_pair, mock_plan, write_rules
from xlangfuzz.fixtures import FIXTURES
from xlangfuzz.generator import GenConfig, generate_ir_program
from xlangfuzz.harness import (
    CompileOutcome,
    CompilerSpec,
    Result,
    Status,
    TestVerdict,
    ToolchainPlan,
    ToolchainUnavailable,
    UnsupportedLanguageMix,
    classify_differential,
    compilation_steps,
    compile_bundle,
    differential_test,
    load_compilers,
    mock_compiler,
    normal_test,
    tool_env_var,
)
from xlangfuzz.ir import Lang
from xlangfuzz.render import SourceBundle, SourceFile, render

REJECT_ALL = {"rules": [], "default": {"exit": 1, "output": "{files}: error: rejected by policy"}}
ECHO = {"rules": [], "default": {"exit": 0, "output": "compiled {files}"}}


def kotlin_bundle():
    return render(FIXTURES["fig3"].program)


def test_always_reject_has_stable_fingerprint(tmp_path):
    plan = mock_plan(tmp_path, {Lang.JAVA: PASS_ALL, Lang.KOTLIN: REJECT_ALL})
    v1 = normal_test(kotlin_bundle(), plan, tmp_path / "w1")
    v2 = normal_test(kotlin_bundle(), plan, tmp_path / "w2")
    assert v1.result is Result.NORMAL_REJECT
    assert v1.fingerprint and v1.fingerprint == v2.fingerprint


def test_identical_mocks_agree(tmp_path):
    latest, earlier = mock_pair(tmp_path, Lang.KOTLIN, PASS_ALL, PASS_ALL)
    v = differential_test(kotlin_bundle(), (latest, earlier), tmp_path / "w")
    assert v.result is Result.OK
    assert v.fingerprint == ""


def test_file_count_rule_gives_discrepancy(tmp_path):
    old = {"rules": [{"when": {"min_files": 3}, "exit": 1, "output": "error: too many files"}]}
    latest, earlier = mock_pair(tmp_path, Lang.KOTLIN, PASS_ALL, old)
    small = render(FIXTURES["fig2"].program)      # three .kt files
    v = differential_test(small, (latest, earlier), tmp_path / "w")
    assert v.result is Result.DISCREPANCY
    tiny = SourceBundle((SourceFile("A0.kt", Lang.KOTLIN, "class A0\n"),), {"A0": "A0.kt"})
    assert differential_test(tiny, (latest, earlier), tmp_path / "w2").result is Result.OK


def test_differential_symmetric(tmp_path):
    old = {"rules": [{"when": {"min_files": 3}, "exit": 1, "output": "error: too many files"}]}
    latest, earlier = mock_pair(tmp_path, Lang.KOTLIN, PASS_ALL, old)
    b = kotlin_bundle()
    v1 = differential_test(b, (latest, earlier), tmp_path / "a")
    v2 = differential_test(b, (earlier, latest), tmp_path / "b")
    assert v1.result is v2.result is Result.DISCREPANCY
    assert v1.fingerprint == v2.fingerprint


def _outcome(status):
    return CompileOutcome(status, 0 if status is Status.PASS else 1, "", 0, status.value)


@given(st.sampled_from(list(Status)), st.sampled_from(list(Status)))
def test_classify_differential_symmetric(a, b):
    assert classify_differential(_outcome(a), _outcome(b)) is classify_differential(_outcome(b), _outcome(a))


def test_classify_differential_table():
    P, R, C, T = Status.PASS, Status.REJECT, Status.CRASH, Status.TIMEOUT
    expect = {
        (P, P): Result.OK, (R, R): Result.OK, (P, R): Result.DISCREPANCY,
        (P, C): Result.CRASH_FOUND, (R, C): Result.CRASH_FOUND, (C, C): Result.CRASH_FOUND,
        (P, T): Result.INCONCLUSIVE, (C, T): Result.INCONCLUSIVE, (T, T): Result.INCONCLUSIVE,
    }
    for (a, b), r in expect.items():
        assert classify_differential(_outcome(a), _outcome(b)) is r


def test_crash_detected(tmp_path):
    crash = {"rules": [], "default": {"exit": 1, "output": (
        'Exception in thread "main" java.lang.NullPointerException\n'
        "\tat org.jetbrains.kotlin.Resolver.resolve(Resolver.kt:12)\n")}}
    plan = mock_plan(tmp_path, {Lang.JAVA: PASS_ALL, Lang.KOTLIN: crash})
    v = normal_test(kotlin_bundle(), plan, tmp_path / "w")
    assert v.result is Result.CRASH_FOUND
    assert v.outcomes[0].status is Status.CRASH
    latest, earlier = mock_pair(tmp_path, Lang.KOTLIN, PASS_ALL, crash)
    assert differential_test(kotlin_bundle(), (latest, earlier)).result is Result.CRASH_FOUND


def _alive(pid):
    try:
        status = Path(f"/proc/{pid}/status").read_text()
    except FileNotFoundError:
        return False
    return "\nState:\tZ" not in status


def test_timeout_kills_process_group(tmp_path):
    pidfile = tmp_path / "child.pid"
    script = (
        "import subprocess, sys, time; "
        "p = subprocess.Popen(['sleep', '60']); "
        f"open({str(pidfile)!r}, 'w').write(str(p.pid)); "
        "time.sleep(60)"
    )
    spec = CompilerSpec("hang", Lang.JAVA, ("{python}", "-c", script, "{classpath}", "{outDir}", "{sources}"),
                        timeout_seconds=1.5)
    plan = ToolchainPlan({Lang.JAVA: spec})
    b = SourceBundle((SourceFile("A0.java", Lang.JAVA, "class A0 {}\n"),), {"A0": "A0.java"})
    start = time.monotonic()
    v = normal_test(b, plan, tmp_path / "w")
    assert time.monotonic() - start < 20
    assert v.result is Result.INCONCLUSIVE
    assert v.outcomes[0].status is Status.TIMEOUT
    pid = int(pidfile.read_text())
    deadline = time.monotonic() + 5
    while _alive(pid) and time.monotonic() < deadline:
        time.sleep(0.05)
    assert not _alive(pid)


def test_kotlin_java_steps_chain(tmp_path):
    plan = mock_plan(tmp_path, {Lang.JAVA: ECHO, Lang.KOTLIN: ECHO})
    b = kotlin_bundle()
    steps = compilation_steps(b, plan)
    assert [s.language for s, _, _ in steps] == [Lang.KOTLIN, Lang.JAVA]
    assert [f.path for f in steps[0][1]] == ["I0.kt", "I1.kt", "A1.kt", "A2.java", "A3.kt"]
    assert [f.path for f in steps[1][1]] == ["A2.java"]
    assert [chained for _, _, chained in steps] == [False, True]
    out = compile_bundle(b, plan, tmp_path / "w")
    assert out.status is Status.PASS
    assert "compiled A1.kt A2.java A3.kt I0.kt I1.kt" in out.diagnostics
    assert "compiled A2.java" in out.diagnostics


def test_groovy_joint_single_step(tmp_path):
    plan = mock_plan(tmp_path, {Lang.JAVA: ECHO, Lang.GROOVY: ECHO})
    steps = compilation_steps(render(FIXTURES["fig7a"].program), plan)
    assert len(steps) == 1 and steps[0][0].language is Lang.GROOVY
    assert len(steps[0][1]) == 3


def test_java_only_and_first_failure_stops(tmp_path):
    plan = mock_plan(tmp_path, {Lang.JAVA: ECHO, Lang.KOTLIN: REJECT_ALL})
    out = compile_bundle(kotlin_bundle(), plan, tmp_path / "w")
    assert out.status is Status.REJECT
    assert "compiled" not in out.diagnostics
    p = generate_ir_program(GenConfig(languages=(Lang.JAVA,)).with_seed(1))
    assert len(compilation_steps(render(p), plan)) == 1


def test_unsupported_mix(tmp_path):
    b = SourceBundle((SourceFile("A0.kt", Lang.KOTLIN, ""), SourceFile("A1.scala", Lang.SCALA, "")),
                     {"A0": "A0.kt", "A1": "A1.scala"})
    plan = mock_plan(tmp_path, {Lang.JAVA: PASS_ALL, Lang.KOTLIN: PASS_ALL, Lang.SCALA: PASS_ALL})
    with pytest.raises(UnsupportedLanguageMix):
        compile_bundle(b, plan)


def test_missing_binary_and_missing_language(tmp_path):
    spec = CompilerSpec("ghost", Lang.JAVA, ("/nonexistent/javac", "-cp", "{classpath}", "-d", "{outDir}",
                                              "{sources}"))
    b = SourceBundle((SourceFile("A0.java", Lang.JAVA, "class A0 {}\n"),), {"A0": "A0.java"})
    with pytest.raises(ToolchainUnavailable):
        compile_bundle(b, ToolchainPlan({Lang.JAVA: spec}))
    with pytest.raises(ToolchainUnavailable):
        compile_bundle(kotlin_bundle(), ToolchainPlan({Lang.JAVA: spec}))


def test_env_override(tmp_path, monkeypatch):
    spec = CompilerSpec("ghost-javac", Lang.JAVA, ("/nonexistent/javac", "-m", "xlangfuzz.mockc", "--rules",
                                                    str(write_rules(tmp_path, "ok", ECHO)), "--cp",
                                                    "{classpath}", "--out", "{outDir}", "{sources}"))
    monkeypatch.setenv(tool_env_var("ghost-javac"), sys.executable)
    assert tool_env_var("ghost-javac") == "XLANGFUZZ_TOOL_GHOST_JAVAC"
    b = SourceBundle((SourceFile("A0.java", Lang.JAVA, "class A0 {}\n"),), {"A0": "A0.java"})
    assert compile_bundle(b, ToolchainPlan({Lang.JAVA: spec})).status is Status.PASS


def test_spec_round_trip_and_checks(tmp_path):
    spec = mock_compiler("m", Lang.KOTLIN, tmp_path / "r.json", version="2.0")
    assert load_compilers([spec.to_json()])["m"] == spec
    with pytest.raises(ValueError):
        load_compilers([{"id": "x", "language": "JAVA", "invocation": ["javac", "{sources}"]}])
    with pytest.raises(ValueError):
        load_compilers([spec.to_json(), spec.to_json()])


def test_plans_may_vary_one_language(tmp_path):
    latest, earlier = mock_pair(tmp_path, Lang.KOTLIN, PASS_ALL, PASS_ALL)
    assert latest.varied_language(earlier) is Lang.KOTLIN
    assert latest.varied_language(latest) is None
    other_java = mock_compiler("j2", Lang.JAVA, tmp_path / "r.json")
    with pytest.raises(ValueError):
        latest.varied_language(earlier.replacing(other_java))


def test_verdict_json_round_trip(tmp_path):
    latest, earlier = mock_pair(tmp_path, Lang.KOTLIN, PASS_ALL, REJECT_ALL)
    v = differential_test(kotlin_bundle(), (latest, earlier))
    assert TestVerdict.from_json(v.to_json()) == v
    assert "durationMs" not in v.to_json(with_timing=False)["outcomes"][0]


def test_workdirs_isolated(tmp_path):
    latest, earlier = mock_pair(tmp_path, Lang.KOTLIN, ECHO, ECHO)
    differential_test(kotlin_bundle(), (latest, earlier), tmp_path / "w")
    dirs = sorted(p.name for p in (tmp_path / "w").iterdir())
    assert dirs == sorted([latest.id, earlier.id])
    assert os.listdir(tmp_path / "w" / latest.id / "out0-mock-kotlin")


@pytest.mark.parametrize("name", [n for n, f in FIXTURES.items()])
def test_fixture_split(tmp_path, name):
    f = FIXTURES[name]
    latest_rules, earlier_rules = f.mock_rules()
    latest, earlier = mock_pair(tmp_path, f.varied, latest_rules, earlier_rules)
    v = differential_test(render(f.program), (latest, earlier), tmp_path / "w")
    assert v.result is (Result.DISCREPANCY if f.bug else Result.OK)
    if f.bug:
        rejecting = v.outcomes[1] if f.rejecting == "earlier" else v.outcomes[0]
        assert rejecting.status is Status.REJECT


def test_fig7b_passes_under_fig7a_bug_rules(tmp_path):
    # the repaired listing must not trip the rule that encodes the fig7a bug
    latest_rules, earlier_rules = FIXTURES["fig7a"].mock_rules()
    pair = mock_pair(tmp_path, Lang.GROOVY, latest_rules, earlier_rules)
    assert differential_test(render(FIXTURES["fig7a"].program), pair, tmp_path / "a").result is Result.DISCREPANCY
    assert differential_test(render(FIXTURES["fig7b"].program), pair, tmp_path / "b").result is Result.OK
