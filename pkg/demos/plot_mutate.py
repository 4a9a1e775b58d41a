"""
Mutating a program
==================

Each mutator makes one local change and records where it happened, so the
change can be replayed on the original or undone on the mutant.
"""

from xlangfuzz.fixtures import FIXTURES
from xlangfuzz.generator import Rng
from xlangfuzz.ir import to_json
from xlangfuzz.mutators import ALL_MUTATORS, NoMutationPossible, invert, mutate, replay

program = FIXTURES["fig3"].program

for i, name in enumerate(ALL_MUTATORS):
    try:
        mutant, rec = mutate(program, Rng(i), (name,))
    except NoMutationPossible:
        print(f"{name}: nothing to change")
        continue
    print(f"{name}: {rec.path}  {rec.before!r} -> {rec.after!r}")
    # replaying the record gives the same mutant, inverting it gives the original back
    assert to_json(replay(program, rec)) == to_json(mutant)
    assert to_json(invert(mutant, rec)) == to_json(program)
