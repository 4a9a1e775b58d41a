"""
The override table
==================

Whether a class must, may or must not override an inherited signature
depends only on what the superclass provides and on how many interface
members of that signature are abstract or concrete.
"""

from xlangfuzz.overrides import InterfaceMethodConfig, SuperMethodKind, classify_override

cols = list(InterfaceMethodConfig)
print(f"{'':10}" + "".join(f"{c.value:>22}" for c in cols))
for row in SuperMethodKind:
    print(f"{row.value:10}" + "".join(f"{classify_override(row, c).value:>22}" for c in cols))

# CANT_STAR marks the cells where a final parent method meets a concrete
# interface method; a Kotlin class there is retagged as Java by the generator.
