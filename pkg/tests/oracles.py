"""Independent reference implementations used to check the library.

Nothing here touches the permanent machinery: amplitudes come from a literal
multinomial expansion of creation operators, and state counting is done by
brute-force enumeration.
"""

import math
from itertools import product

import numpy as np


def operator_expansion_amplitude(u, input_state, output_state) -> complex:
    """Transition amplitude by expanding each photon's creation operator.

    Every photon entering mode i turns into sum_j u[i, j] b_j; expanding the
    product over all photons and collecting the target occupation pattern
    gives the amplitude without ever forming a submatrix or permanent.
    """
    u = np.asarray(u, dtype=complex)
    m = len(input_state)
    slots = [i for i, c in enumerate(input_state) for _ in range(c)]
    target = tuple(int(c) for c in output_state)
    raw = 0j
    for assignment in product(range(m), repeat=len(slots)):
        counts = [0] * m
        coef = 1 + 0j
        for slot, j in zip(slots, assignment):
            coef *= u[slot, j]
            counts[j] += 1
        if tuple(counts) == target:
            raw += coef
    norm_in = math.prod(math.factorial(c) for c in input_state)
    norm_out = math.prod(math.factorial(c) for c in output_state)
    return raw * math.sqrt(norm_out) / math.sqrt(norm_in)


def count_occupations(m: int, n: int) -> int:
    """Number of n-photon m-mode occupation patterns, by exhaustive counting."""
    return sum(1 for combo in product(range(n + 1), repeat=m) if sum(combo) == n)


def three_step_amplitude(w, gate_factor, v, input_state, output_state) -> complex:
    """Path sum through an intermediate diagonal layer, via the operator oracle.

    `gate_factor(state) -> complex` multiplies each intermediate pattern.
    """
    m, n = len(input_state), sum(input_state)
    total = 0j
    for r in product(range(n + 1), repeat=m):
        if sum(r) != n:
            continue
        total += (
            operator_expansion_amplitude(w, input_state, r)
            * gate_factor(r)
            * operator_expansion_amplitude(v, r, output_state)
        )
    return total
