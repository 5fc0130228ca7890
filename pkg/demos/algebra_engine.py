"""Finite-dimensional von Neumann algebras from generators.

Generate an algebra, find its block decomposition, and check the double
commutant theorem numerically.
"""
import numpy as np

from privalg.algebra import center, commutant, generate, structure, subspace_distance
from privalg.numerics import random_unitary

rng = np.random.default_rng(3)
u = random_unitary(5, rng)
# M_2 (x) I_2 (+) C, hidden by a unitary change of basis
g1 = np.zeros((5, 5), dtype=complex)
g1[:4, :4] = np.kron(rng.normal(size=(2, 2)), np.eye(2))
g2 = np.zeros((5, 5), dtype=complex)
g2[:4, :4] = np.kron(rng.normal(size=(2, 2)), np.eye(2))
g2[4, 4] = 1.0
a = generate([u @ g1 @ u.conj().T, u @ g2 @ u.conj().T], 5)
s = structure(a)
print("dim A =", a.dim, " blocks (a, b):", s.blocks)
print("dim A' =", commutant(a).dim, " dim Z(A) =", center(a).dim)
print("distance A'' vs A:", f"{subspace_distance(a, commutant(commutant(a))):.1e}")
