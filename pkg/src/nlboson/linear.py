"""Linear photonic sampling: amplitudes, full output distributions, exact
sampling by inversion, and the permanent composition identity.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, StateSpaceTooLargeError
from .fock import (
    FockState,
    StateSpace,
    as_state,
    enumerate_states,
    normalization_product,
    occupation_indices,
    parse_state,
    photon_count,
    space_size,
)
from .linalg import (
    gathered_permanents,
    matrix_from_states,
    permanent,
    require_unitary,
    unitarity_deviation,
)

__all__ = [
    "Distribution",
    "amplitude",
    "output_distribution",
    "sample_exact",
    "verify_composition",
    "write_distribution_csv",
    "read_distribution_csv",
]

SAMPLING_SPACE_GUARD = 1_000_000


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probabilities over the states of one StateSpace, in its canonical order."""

    space: StateSpace
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (len(self.space),):
            raise DimensionError(
                f"expected {len(self.space)} probabilities, got shape {p.shape}"
            )
        if not np.all(np.isfinite(p)):
            raise ValueError("probabilities contain non-finite values")
        if p.size and p.min() < -1e-12:
            raise ValueError(f"negative probability {p.min():.3e}")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def prob_of(self, state: Sequence[int]) -> float:
        return float(self.probs[self.space.rank(state)])

    def as_dict(self) -> dict[FockState, float]:
        return {s: float(p) for s, p in zip(self.space.states, self.probs)}

    def total(self) -> float:
        return float(self.probs.sum())


def amplitude(U, input_state, output_state, *, unitarity_tol: float = 1e-8) -> complex:
    """Transition amplitude through the mode unitary U.

    per(U_{S,T}) / sqrt(prod s_i! * prod t_j!), with rows of U selected by the
    input occupations and columns by the output occupations.
    """
    u = require_unitary(U, unitarity_tol, "amplitude")
    s = as_state(input_state)
    t = as_state(output_state)
    sub = matrix_from_states(u, s, t)
    norm = math.sqrt(normalization_product(s) * normalization_product(t))
    return permanent(sub) / norm


def _amplitudes_to_all(U, input_state, space: StateSpace) -> np.ndarray:
    """Amplitudes from one input to every state of `space`, batched.

    No unitarity re-check; callers validate once.
    """
    u = np.asarray(U, dtype=complex)
    s = as_state(input_state)
    if photon_count(s) == 0:
        return np.ones(len(space), dtype=complex)
    rows = np.array(occupation_indices(s), dtype=np.intp)
    cols = np.array([occupation_indices(t) for t in space.states], dtype=np.intp)
    pers = gathered_permanents(u, rows, cols)
    norm_in = math.sqrt(normalization_product(s))
    norms_out = np.sqrt(np.array([normalization_product(t) for t in space.states], dtype=float))
    return pers / (norm_in * norms_out)


def output_distribution(U, input_state, *, unitarity_tol: float = 1e-8) -> Distribution:
    """|amplitude|^2 over the full output space; sums to one for a unitary U."""
    u = require_unitary(U, unitarity_tol, "output_distribution")
    s = as_state(input_state)
    if len(s) != u.shape[0]:
        raise DimensionError(f"state has {len(s)} modes, matrix has {u.shape[0]}")
    space = enumerate_states(len(s), photon_count(s))
    amps = _amplitudes_to_all(u, s, space)
    probs = np.abs(amps) ** 2
    total = probs.sum()
    tol = max(1e-9, 20 * u.shape[0] * unitarity_deviation(u))
    if abs(total - 1.0) > tol:
        raise ValueError(
            f"output distribution sums to {total!r}, expected 1 within {tol:.1e}"
        )
    return Distribution(space, probs)


def _inverse_sample(probs: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    draws = rng.random(count)
    idx = np.searchsorted(cdf, draws, side="right")
    return np.minimum(idx, len(probs) - 1)


def sample_exact(U, input_state, count: int, rng: np.random.Generator,
                 *, unitarity_tol: float = 1e-8) -> list[FockState]:
    """i.i.d. draws from the exact output distribution (inversion sampling)."""
    s = as_state(input_state)
    size = space_size(len(s), photon_count(s))
    if size > SAMPLING_SPACE_GUARD:
        raise StateSpaceTooLargeError(
            f"cannot materialize {size} output states for sampling "
            f"(guard {SAMPLING_SPACE_GUARD}); reduce m or n"
        )
    dist = output_distribution(U, s, unitarity_tol=unitarity_tol)
    idx = _inverse_sample(dist.probs, int(count), rng)
    return [dist.space.states[i] for i in idx]


def verify_composition(W, V, input_state, output_state,
                       *, unitarity_tol: float = 1e-8) -> float:
    """Residual of the permanent composition identity for 'W then V'.

    |per((W@V)_{S,T}) - sum_R per(W_{S,R}) per(V_{R,T}) / prod r_i!|, which is
    zero (to rounding) under the package's composition convention.
    """
    w = require_unitary(W, unitarity_tol, "verify_composition: first factor")
    v = require_unitary(V, unitarity_tol, "verify_composition: second factor")
    if w.shape != v.shape:
        raise DimensionError(f"factor shapes differ: {w.shape} vs {v.shape}")
    s = as_state(input_state)
    t = as_state(output_state)
    n = photon_count(s)
    if photon_count(t) != n:
        raise DimensionError("input and output photon numbers differ")
    space = enumerate_states(len(s), n)
    lhs = permanent(matrix_from_states(w @ v, s, t))
    rhs = 0j
    for r in space:
        rhs += (
            permanent(matrix_from_states(w, s, r))
            * permanent(matrix_from_states(v, r, t))
            / normalization_product(r)
        )
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# CSV wire format: state (comma-separated occupations, quoted), probability
# printed with 17 significant digits for lossless round-trips
# ---------------------------------------------------------------------------

def write_distribution_csv(dist: Distribution, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("state,probability\n")
        for state, p in zip(dist.space.states, dist.probs):
            fh.write(f'"{",".join(str(c) for c in state)}",{p:.17g}\n')


def read_distribution_csv(path) -> Distribution:
    states: list[FockState] = []
    probs: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["state", "probability"]:
            raise ValueError(f"unexpected distribution CSV header: {header}")
        for row in reader:
            states.append(parse_state(row[0]))
            probs.append(float(row[1]))
    if not states:
        raise ValueError("empty distribution CSV")
    m = len(states[0])
    n = photon_count(states[0])
    space = enumerate_states(m, n)
    if list(space.states) != states:
        raise ValueError("distribution CSV rows are not the canonical state ordering")
    return Distribution(space, np.array(probs))
