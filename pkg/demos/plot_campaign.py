"""
A small campaign
================

Run a full generate / mutate / test / minimize loop against mock compilers
where the older Kotlin compiler chokes on every ``override fun``, then
build the findings report.
"""

import json
import sys
import tempfile
from pathlib import Path

from xlangfuzz.campaign import CampaignConfig, report, report_markdown, run_campaign

mock = [sys.executable, "-m", "xlangfuzz.mockc", "--cp", "{classpath}", "--out", "{outDir}"]

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    (tmp / "ok.json").write_text(json.dumps({"rules": []}))
    (tmp / "old.json").write_text(json.dumps({"rules": [
        {"when": {"contains": "override fun"}, "exit": 1, "output": "A1.kt:2:5: error: unresolved override"}]}))
    cfg = CampaignConfig.from_json({
        "campaignSeed": 1,
        "maxPrograms": 3,
        "minimizeBudget": 20,
        "genConfig": {"declCountRange": [3, 6], "languages": ["JAVA", "KOTLIN"]},
        "toolchains": [
            {"id": "javac", "language": "JAVA", "invocation": mock + ["--rules", "{configDir}/ok.json", "{sources}"]},
            {"id": "kotlinc-new", "language": "KOTLIN", "invocation": mock + ["--rules", "{configDir}/ok.json", "{sources}"]},
            {"id": "kotlinc-old", "language": "KOTLIN", "invocation": mock + ["--rules", "{configDir}/old.json", "{sources}"]},
        ],
        "latest": {"JAVA": "javac", "KOTLIN": "kotlinc-new"},
        "differentialPairs": [{"language": "KOTLIN", "earlier": "kotlinc-old"}],
        "outputDir": "out",
    }, tmp)

    summary = run_campaign(cfg)
    print(json.dumps(summary.to_json()["findings"], indent=2))
    if summary.findings:
        print(report_markdown(report(cfg.output_dir)))
