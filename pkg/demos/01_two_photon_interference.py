"""Linear sampling basics: Fock states, permanents, two-photon interference.

Walks through the core objects of the library on the smallest interesting
system: two photons meeting at a balanced beamsplitter.
"""

import math

import numpy as np

import nlboson as nb

# ----------------------------------------------------------------------
# The state space: all ways to put n photons in m modes
# ----------------------------------------------------------------------
space = nb.enumerate_states(2, 2)
print("two photons in two modes:", list(space))
print("size matches C(n+m-1, n):", len(space) == math.comb(3, 2))

# ----------------------------------------------------------------------
# Transition amplitudes are permanents of row/column-selected submatrices
# ----------------------------------------------------------------------
bs = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
print("\nbalanced beamsplitter:\n", bs.round(4))

for t in space:
    a = nb.amplitude(bs, (1, 1), t)
    print(f"  amplitude (1,1) -> {t}: {a:+.4f}")

print("\nThe coincidence amplitude vanishes: both photons always bunch.")
dist = nb.output_distribution(bs, (1, 1))
print("output distribution:", {s: round(p, 4) for s, p in dist.as_dict().items()})

# ----------------------------------------------------------------------
# Sampling reproduces the distribution
# ----------------------------------------------------------------------
samples = nb.sample_exact(bs, (1, 1), 20_000, np.random.default_rng(1))
freq = {s: samples.count(s) / len(samples) for s in space}
print("sampled frequencies: ", {s: round(f, 4) for s, f in freq.items()})

# ----------------------------------------------------------------------
# Composing two networks: 'A then B' is the matrix product A @ B, and the
# permanent composition identity ties the two pictures together
# ----------------------------------------------------------------------
rng = np.random.default_rng(2)
w, v = nb.haar_unitary(3, rng), nb.haar_unitary(3, rng)
residual = nb.verify_composition(w, v, (1, 1, 0), (0, 1, 1))
print(f"\npermanent composition identity residual: {residual:.2e}")
