"""Matching primitives: max-weight matchings, tie-breaking, Hamming loss."""

import numpy as np

from abmatch import brute_force_matching, hamming_distance, matching_weight, max_weight_matching

print("A 2x2 matching problem")
w = np.array([[3.0, 1.0], [1.0, 2.0]])
pi = max_weight_matching(w)
print(f"  weights:\n{w}")
print(f"  best matching: {pi.assignment}, total weight {matching_weight(w, pi)}")

print("\nTies break toward the lexicographically smallest assignment")
print(f"  all-zero 3x3 -> {max_weight_matching(np.zeros((3, 3))).assignment}")
w_tied = np.array([[1.0, 2.0], [3.0, 4.0]])  # both matchings total 5
print(f"  [[1,2],[3,4]] -> {max_weight_matching(w_tied).assignment} "
      f"(brute force agrees: {brute_force_matching(w_tied).assignment})")

print("\nThe solver agrees with exhaustive enumeration")
rng = np.random.default_rng(0)
for n in (3, 5, 7):
    w = rng.normal(size=(n, n))
    fast = max_weight_matching(w)
    slow = brute_force_matching(w)
    print(f"  n={n}: solver={matching_weight(w, fast):.6f} "
          f"brute force={matching_weight(w, slow):.6f} "
          f"same permutation: {fast.assignment == slow.assignment}")

print("\nHamming distance counts disagreeing assignments")
a, b = max_weight_matching(rng.normal(size=(6, 6))), max_weight_matching(rng.normal(size=(6, 6)))
print(f"  {a.assignment} vs {b.assignment} -> {hamming_distance(a, b)}")
