"""Finite-field arithmetic and exhaustive MDS checks for a small code."""

import itertools

from mbm_dmt import Field, MdsCode, count_support_subset, min_distance_exhaustive

F = Field.of_order(8)
print(F.describe())
print("3 * 5 =", F.mul(3, 5), " 3^-1 =", F.inv(3))

code = MdsCode.reed_solomon(5, 4, 2)
print(code.describe(), "min distance", min_distance_exhaustive(code))
for size in range(1, code.N + 1):
    counts = [count_support_subset(code, I) for I in itertools.combinations(range(code.N), size)]
    print(f"|I|={size}: words with support exactly I: {sorted(set(counts))}")
