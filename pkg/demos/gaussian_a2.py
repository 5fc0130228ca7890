"""A single-mode bosonic channel with K = diag(1, 0).

Weyl operators in the direction of position pass through unchanged, so they
form a private algebra.  The complement, built from a purification of the
thermal environment, carries them back exactly.
"""
import numpy as np

from privalg.symplectic import (
    a2_channel,
    private_weyl_subalgebra,
    purification_check,
    verify_a2_recovery,
)

for n0 in (0, 1, 2):
    desc = a2_channel(n0)
    sub = private_weyl_subalgebra(desc)
    rep = verify_a2_recovery(n0)
    check = purification_check(n0)
    print(f"N0={n0}: private directions {np.round(sub.basis.T, 12).tolist()},"
          f" recovery max deviation {rep.max_deviation:.1e},"
          f" purification marginal deviation {check['marginal_deviation']:.1e}")
    for row in rep.rows[:3]:
        print(f"   x={row['x']:>5}: image {row['image']}, coefficient {row['coefficient']}")
