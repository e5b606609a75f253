"""Zero-sum matching games: restricted solves and the double oracle.

The predictor picks a mixture over permutations to minimize expected
Hamming loss; the adversary picks one to maximize it plus a potential
bonus.  The double oracle grows both strategy sets with Hungarian best
responses until neither player can improve.
"""

import numpy as np

from abmatch import GameConfig, double_oracle_equilibrium, solve_matrix_game

print("Matching pennies as a matrix game (row minimizes)")
x, z, v = solve_matrix_game([[0.0, 2.0], [2.0, 0.0]])
print(f"  value {v}, row strategy {x}, column strategy {z}")

print("\nZero potentials, n=2: the adversary mixes over both permutations")
eq = double_oracle_equilibrium(np.zeros((2, 2)))
print(f"  value {eq.value:.6f} (pure Hamming game)")
for perm, p in zip(eq.adversary.support, eq.adversary.probs):
    print(f"  adversary plays {perm.assignment} with prob {p:.3f}")

print("\nPeaked potentials collapse the game to a point mass")
eq = double_oracle_equilibrium(np.diag([10.0, 10.0]))
print(f"  value {eq.value:.6f}, adversary support size {eq.support_size}")

print("\nA random 5x5 game, cold start vs warm restart")
rng = np.random.default_rng(1)
psi = rng.normal(size=(5, 5))
trace = []
eq = double_oracle_equilibrium(psi, trace=trace)
print(f"  converged in {eq.iterations} iterations, support {eq.support_size}, "
      f"value {eq.value:.6f}")
print(f"  restricted values along the way: "
      f"{[round(t['value'], 4) for t in trace]}")
warm = GameConfig(warm_start=(eq.predictor.support, eq.adversary.support))
eq2 = double_oracle_equilibrium(psi, warm)
print(f"  warm restart: {eq2.iterations} iteration(s), value {eq2.value:.6f}")

print("\nEquilibrium marginals are doubly stochastic")
print(np.round(eq.adversary_marginals, 3))
print(f"  row sums {np.round(eq.adversary_marginals.sum(axis=1), 9)}")
