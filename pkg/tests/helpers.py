"""Seeded instance builders shared by the test modules."""
import numpy as np

from privalg.algebra import generate
from privalg.numerics import dag, random_isometry, random_matrix


def random_blocks(rng, d_max=6, d_min=2):
    """Block sizes (a, b) with 2 <= sum a*b <= d_max, plus an ambient dim."""
    while True:
        blocks = []
        d = int(rng.integers(d_min, d_max + 1))
        room = d
        while room > 0 and len(blocks) < 3:
            a = int(rng.integers(1, min(room, 3) + 1))
            b = int(rng.integers(1, room // a + 1))
            blocks.append((a, b))
            room -= a * b
            if rng.random() < 0.4:
                break
        used = sum(a * b for a, b in blocks)
        if used >= 1 and d >= 2:
            return blocks, d


def planted_algebra(rng, d_max=6, unital=False):
    """Algebra generated by two random elements of a hidden block algebra.

    Returns ``(algebra, blocks)``; no structure is cached on the algebra.
    With ``unital`` the unit is the identity.
    """
    blocks, d = random_blocks(rng, d_max)
    used = sum(a * b for a, b in blocks)
    if unital:
        d = max(used, 2)
        if used < 2:
            blocks, used = [(1, 2)], 2
    w = random_isometry(d, used, rng)
    gens = []
    for _ in range(2):
        x = np.zeros((d, d), dtype=complex)
        pos = 0
        for a, b in blocks:
            wk = w[:, pos:pos + a * b]
            x += wk @ np.kron(random_matrix(a, a, rng), np.eye(b)) @ dag(wk)
            pos += a * b
        gens.append(x)
    return generate(gens, d, w @ dag(w)), blocks
