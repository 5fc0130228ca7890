"""Walk the gallery: each channel next to its designated subalgebra.

For every entry we report whether the subalgebra is private (the image of
the channel commutes with it) and whether it is correctable (some recovery
channel undoes the noise on it), with the residuals behind each verdict.
"""
from privalg import gallery
from privalg.privacy import is_correctable, is_private

print(f"{'entry':28s} {'expected':12s} {'private':>16s} {'correctable':>16s}")
for ent in gallery.acceptance_entries():
    p = is_private(ent.channel, ent.algebra, ent.projection)
    c = is_correctable(ent.channel, ent.algebra, ent.projection)
    pv = f"{'yes' if p.verdict else 'no'} ({p.residual:.1e})"
    cv = f"{'yes' if c.verdict else 'no'} ({c.residual:.1e})"
    print(f"{ent.name:28s} {ent.expected:12s} {pv:>16s} {cv:>16s}")

# a factor is private only when the whole range commutes with it; the
# qubit twirl over the quaternion group sends everything to multiples of I
q = gallery.group_average(gallery.quaternion_group())
print("\nquaternion twirl of X:\n", q.channel.apply(gallery.X).round(12))
