"""Approximate version: mix a little depolarizing noise into a flip channel.

The diagonal algebra is then only approximately private, with error eps
measured in cb-norm by a semidefinite program.  The complement remains
approximately correctable, and the recovery we build is within 2 sqrt(eps).
"""
import numpy as np

from privalg import gallery
from privalg.channel import depolarizing
from privalg.privacy import check_eps_bound

for ent in (gallery.phase_flip(1), gallery.bit_flip(1)):
    for t in (1e-1, 1e-2, 1e-4):
        rep = check_eps_bound(ent.channel, depolarizing(2), t, ent.algebra)
        print(f"{ent.name} t={t:<7g} eps={rep.epsilon:.3e}  achieved={rep.achieved:.3e}"
              f"  2*sqrt(eps)={2 * np.sqrt(rep.epsilon):.3e}  holds={rep.holds}")
