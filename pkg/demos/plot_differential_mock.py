"""
Differential testing with scripted compilers
============================================

Without a JVM we can still exercise the harness: the mock compiler reads a
rule file and rejects any compilation whose sources match a pattern. Here
the "earlier" Kotlin compiler rejects the fig3 listing and the latest one
accepts it, which is a discrepancy.
"""

import json
import tempfile
from pathlib import Path

from xlangfuzz.fixtures import FIXTURES
from xlangfuzz.harness import ToolchainPlan, differential_test, mock_compiler
from xlangfuzz.ir import Lang
from xlangfuzz.render import render

fixture = FIXTURES["fig3"]
latest_rules, earlier_rules = fixture.mock_rules()

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    for name, rules in (("ok", latest_rules), ("old", earlier_rules), ("java", {"rules": []})):
        (tmp / f"{name}.json").write_text(json.dumps(rules))
    latest = ToolchainPlan({
        Lang.JAVA: mock_compiler("javac", Lang.JAVA, tmp / "java.json"),
        Lang.KOTLIN: mock_compiler("kotlinc-new", Lang.KOTLIN, tmp / "ok.json"),
    })
    earlier = latest.replacing(mock_compiler("kotlinc-old", Lang.KOTLIN, tmp / "old.json"))

    verdict = differential_test(render(fixture.program), (latest, earlier), tmp / "work")
    print("result:", verdict.result.value)
    for o in verdict.outcomes:
        print(f"  {o.compiler}: {o.status.value}  fingerprint={o.fingerprint}")
        if o.diagnostics:
            print("   ", o.diagnostics.strip())
