"""Schur multipliers from a family of unit vectors.

The map multiplies a matrix entrywise by the Gram matrix of the vectors.
It is a bimodule map over the diagonals, so the diagonals are correctable,
and the complementary channel lands in an abelian algebra.
"""
import numpy as np

from privalg import gallery
from privalg.channel import complement, minimal_stinespring
from privalg.privacy import is_correctable

rng = np.random.default_rng(11)
for m in (3, 4, 5):
    ent = gallery.schur(gallery.random_unit_vectors(m, 2, rng))
    rep = is_correctable(ent.channel, ent.algebra)
    c = complement(minimal_stinespring(ent.channel))
    comm = max(np.abs(a @ b - b @ a).max() for a in c.action for b in c.action)
    print(f"m={m}: diagonals correctable={rep.verdict} (error {rep.achieved_error:.1e}),"
          f" complement range commutators <= {comm:.1e}")
