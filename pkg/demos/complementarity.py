"""Privacy for a channel is correctability for its complement, and back.

We plant a private subalgebra inside a random channel, build the minimal
Stinespring dilation, pass to the complementary channel on the commutant
of the dilation, and recover the subalgebra there.  The same happens for a
deliberately redundant dilation.
"""
import numpy as np

from privalg import gallery
from privalg.channel import complement, enlarge, minimal_stinespring
from privalg.privacy import is_correctable, is_private

for seed in range(5):
    ent = gallery.planted_private(seed)
    e, n = ent.channel, ent.algebra
    t = minimal_stinespring(e)
    print(f"{ent.name}: dim N = {n.dim}, dilation dim = {t.H_dim}, private = {is_private(e, n).verdict}")
    for label, triple in (("minimal", t), ("enlarged", enlarge(t, 1, np.random.default_rng(seed)))):
        c = complement(triple)
        rep = is_correctable(c, n)
        print(f"   {label:9s} complement: correctable = {rep.verdict}, recovery error {rep.achieved_error:.1e}")

# the other direction: the identity corrects everything, its complement
# (on scalars) is a deletion channel and M_2 is private for it
from privalg.channel import identity_channel

c = complement(minimal_stinespring(identity_channel(2)))
print("\nidentity complement domain dim:", c.domain.dim)
