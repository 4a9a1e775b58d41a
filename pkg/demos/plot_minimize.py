"""
Minimizing a trigger program
============================

The minimizer only needs an oracle that maps a program to a verdict. With
an in-process predicate the whole loop runs in milliseconds; here the "bug"
is any class with at least two supertypes.
"""

from xlangfuzz.generator import GenConfig, generate_ir_program
from xlangfuzz.ir import to_json
from xlangfuzz.minimizer import minimize, predicate_oracle

def bug(p):
    return any(len(d.supertypes) >= 2 for d in p.declarations)

seed = next(s for s in range(100) if bug(generate_ir_program(GenConfig().with_seed(s))))
program = generate_ir_program(GenConfig().with_seed(seed))
result = minimize(program, predicate_oracle(bug))

print(f"{len(program.declarations)} declarations -> {len(result.minimized.declarations)}")
print(f"oracle calls: {result.oracle_calls}, kept passes: {len(result.kept)}")
for p, kept in result.trail[:12]:
    print(f"  {'keep' if kept else 'undo'}  {p.kind.value:22} {p.target} {p.arg or ''}")
print(to_json(result.minimized))
