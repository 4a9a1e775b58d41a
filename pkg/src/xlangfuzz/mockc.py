"""Scripted stand-in for a compiler, used to test the harness without a JVM.

Usage::

    python -m xlangfuzz.mockc --rules rules.json --cp CP --out DIR SOURCES...

The rule file holds ``{"rules": [...], "default": {...}}``. The first rule
whose ``when`` clause matches decides the exit code and printed output; if
none matches, ``default`` applies (exit 0, no output, unless overridden).

Conditions in ``when`` (all must hold):

``files_all``   every listed base name is among the sources
``files_any``   at least one listed base name is among the sources
``files_none``  none of the listed base names is among the sources
``min_files``   at least this many sources
``max_files``   at most this many sources
``contains``    regex searched in the concatenated source text
``absent``      regex that must not occur in the source text

A rule may also ``sleep`` for some seconds before exiting. Output may use
``{files}`` for the space-separated base names. On exit 0 an empty
``<stem>.class`` is written to the output directory for each source.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path


def matches(when: dict, names: list[str], text: str) -> bool:
    s = set(names)
    if "files_all" in when and not set(when["files_all"]) <= s:
        return False
    if "files_any" in when and not set(when["files_any"]) & s:
        return False
    if "files_none" in when and set(when["files_none"]) & s:
        return False
    if "min_files" in when and len(names) < when["min_files"]:
        return False
    if "max_files" in when and len(names) > when["max_files"]:
        return False
    if "contains" in when and not re.search(when["contains"], text, re.M):
        return False
    if "absent" in when and re.search(when["absent"], text, re.M):
        return False
    return True


def decide(rules: dict, names: list[str], text: str) -> dict:
    for rule in rules.get("rules", []):
        if matches(rule.get("when", {}), names, text):
            return rule
    return rules.get("default", {})


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="mockc")
    ap.add_argument("--rules", required=True)
    ap.add_argument("--cp", default="")
    ap.add_argument("--out", required=True)
    ap.add_argument("sources", nargs="*")
    args = ap.parse_args(argv)

    rules = json.loads(Path(args.rules).read_text())
    paths = [Path(s) for s in args.sources]
    names = sorted(p.name for p in paths)
    text = "\n".join(p.read_text() for p in sorted(paths, key=lambda p: p.name))
    rule = decide(rules, names, text)

    if rule.get("sleep"):
        time.sleep(float(rule["sleep"]))
    output = rule.get("output", "")
    if output:
        sys.stdout.write(output.replace("{files}", " ".join(names)))
        if not output.endswith("\n"):
            sys.stdout.write("\n")
    code = int(rule.get("exit", 0))
    if code == 0:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for p in paths:
            (out / f"{p.stem}.class").write_bytes(b"")
    return code


if __name__ == "__main__":
    sys.exit(main())
