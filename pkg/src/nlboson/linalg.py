"""Complex dense linear algebra for mode unitaries.

Conventions used throughout the package:

* A physical circuit that applies network ``A`` and then network ``B`` is
  represented by the matrix product ``A @ B``.
* Transition amplitudes select rows of the unitary by the *input* state and
  columns by the *output* state (see :func:`matrix_from_states`).

These two choices are mutually consistent: the permanent composition identity
(`linear.verify_composition`) vanishes under them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import permutations
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionError, NotUnitaryError
from .fock import occupation_indices, photon_count

__all__ = [
    "permanent",
    "permanent_naive",
    "permanents",
    "gathered_permanents",
    "matrix_from_states",
    "haar_unitary",
    "ReckParams",
    "random_reck_params",
    "reck_to_unitary",
    "direct_sum",
    "phase_shifter",
    "matmul",
    "unitarity_deviation",
    "require_unitary",
    "matrix_to_json",
    "matrix_from_json",
    "save_matrix",
    "load_matrix",
]

_NAIVE_MAX_SIZE = 9


def _as_square(mat) -> np.ndarray:
    a = np.asarray(mat, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


def permanent_naive(mat) -> complex:
    """Permanent by the defining permutation sum.

    Deliberately unoptimized; serves as the independent oracle for the Ryser
    kernel and is refused above 9x9.
    """
    a = _as_square(mat)
    n = a.shape[0]
    if n > _NAIVE_MAX_SIZE:
        raise DimensionError(
            f"permanent_naive is an oracle for sizes <= {_NAIVE_MAX_SIZE}, got {n}"
        )
    if n == 0:
        return 1 + 0j
    rows = [tuple(map(complex, r)) for r in a]
    total = 0j
    for sigma in permutations(range(n)):
        prod = 1 + 0j
        for i, j in enumerate(sigma):
            prod *= rows[i][j]
        total += prod
    return total


def permanent(mat) -> complex:
    """Permanent via Ryser's formula with Gray-code subset updates.

    O(2^s * s) for an s x s matrix; the empty 0x0 matrix has permanent 1
    (required so vacuum amplitudes come out right).
    """
    a = _as_square(mat)
    n = a.shape[0]
    if n == 0:
        return 1 + 0j
    if n == 1:
        return complex(a[0, 0])
    cols = [tuple(map(complex, a[:, j])) for j in range(n)]
    row_sums = [0j] * n
    total = 0j
    sign = 1.0  # (-1)^|S|, starts at |S|=0
    gray = 0
    for k in range(1, 1 << n):
        new_gray = k ^ (k >> 1)
        j = (gray ^ new_gray).bit_length() - 1
        col = cols[j]
        if new_gray & (1 << j):
            for i in range(n):
                row_sums[i] += col[i]
            sign = -sign
        else:
            for i in range(n):
                row_sums[i] -= col[i]
            sign = -sign
        gray = new_gray
        prod = 1 + 0j
        for v in row_sums:
            prod *= v
        total += sign * prod
    if n % 2:
        total = -total
    return total


def permanents(mats) -> np.ndarray:
    """Permanents of a stack of equally-sized square matrices, shape (B, s, s).

    Vectorized Ryser evaluation over all non-empty column subsets; used by the
    distribution hot paths and cross-checked against :func:`permanent`.
    """
    a = np.asarray(mats, dtype=complex)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionError(f"expected a (B, s, s) stack, got shape {a.shape}")
    batch, n = a.shape[0], a.shape[1]
    if batch == 0:
        return np.zeros(0, dtype=complex)
    if n == 0:
        return np.ones(batch, dtype=complex)
    subsets = np.arange(1, 1 << n, dtype=np.int64)
    masks = ((subsets[:, None] >> np.arange(n)) & 1).astype(float)  # (S, n)
    signs = np.where(masks.sum(axis=1).astype(int) % 2 == 0, 1.0, -1.0)
    if n % 2:
        signs = -signs
    out = np.empty(batch, dtype=complex)
    # chunk so the (chunk, S, n) row-sum tensor stays small
    chunk = max(1, int(4_000_000 // (masks.shape[0] * n)))
    for lo in range(0, batch, chunk):
        block = a[lo : lo + chunk]
        row_sums = np.einsum("sj,bij->bsi", masks, block)
        out[lo : lo + chunk] = row_sums.prod(axis=2) @ signs
    return out


def gathered_permanents(U, row_indices, col_indices) -> np.ndarray:
    """per(U[rows_i, cols_i]) for paired lists of (repeated) index rows.

    `row_indices` and `col_indices` are integer arrays of shape (B, s); either
    may be a single (s,) vector shared across the batch.  Processed in blocks
    so the gathered submatrix stack stays small.
    """
    u = np.asarray(U, dtype=complex)
    rows = np.asarray(row_indices, dtype=np.intp)
    cols = np.asarray(col_indices, dtype=np.intp)
    if rows.ndim == 1 and cols.ndim == 2:
        rows = np.broadcast_to(rows, (cols.shape[0], rows.shape[0]))
    elif cols.ndim == 1 and rows.ndim == 2:
        cols = np.broadcast_to(cols, (rows.shape[0], cols.shape[0]))
    if rows.shape != cols.shape:
        raise DimensionError(
            f"row and column index shapes differ: {rows.shape} vs {cols.shape}"
        )
    batch, _ = rows.shape
    out = np.empty(batch, dtype=complex)
    block = 65536
    for lo in range(0, batch, block):
        hi = min(lo + block, batch)
        subs = u[rows[lo:hi, :, None], cols[lo:hi, None, :]]
        out[lo:hi] = permanents(subs)
    return out


def matrix_from_states(U, input_state: Sequence[int], output_state: Sequence[int]) -> np.ndarray:
    """n x n matrix with row i of U repeated s_i times, column j repeated t_j times.

    Rows come from the input occupations, columns from the output occupations;
    for single-occupancy states this is plain row/column selection.
    """
    u = np.asarray(U, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"expected a square mode unitary, got shape {u.shape}")
    m = u.shape[0]
    if len(input_state) != m or len(output_state) != m:
        raise DimensionError(
            f"states have {len(input_state)} and {len(output_state)} modes, matrix has {m}"
        )
    n_in = photon_count(input_state)
    n_out = photon_count(output_state)
    if n_in != n_out:
        raise DimensionError(f"photon numbers differ: {n_in} vs {n_out}")
    rows = occupation_indices(input_state)
    cols = occupation_indices(output_state)
    return u[np.ix_(rows, cols)]


def haar_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed m x m unitary.

    QR of an i.i.d. complex-Gaussian matrix, with the R-diagonal phase
    correction that makes the distribution exactly Haar.  Deterministic for a
    given generator state.
    """
    if m < 1:
        raise DimensionError(f"mode count must be >= 1, got {m}")
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def unitarity_deviation(U) -> float:
    """Max-norm deviation of U†U from the identity."""
    u = _as_square(U)
    eye = np.eye(u.shape[0])
    return float(np.abs(u.conj().T @ u - eye).max()) if u.size else 0.0


def require_unitary(U, tol: float = 1e-8, context: str = "") -> np.ndarray:
    u = _as_square(U)
    dev = unitarity_deviation(u)
    if dev > tol:
        raise NotUnitaryError(dev, tol, context)
    return u


@dataclass(frozen=True, eq=False)
class ReckParams:
    """Angles of a triangular two-mode-rotation mesh on m modes.

    thetas:        m(m-1)/2 mixing angles in [0, pi/2]
    phis:          m(m-1)/2 internal phases in [0, 2*pi)
    output_phases: m output phases in [0, 2*pi)

    Any in-range assignment maps to a unitary; the mesh plus output phases
    covers all of U(m).
    """

    m: int
    thetas: np.ndarray
    phis: np.ndarray
    output_phases: np.ndarray

    def __post_init__(self):
        n_pairs = self.m * (self.m - 1) // 2
        thetas = np.atleast_1d(np.asarray(self.thetas, dtype=float))
        phis = np.atleast_1d(np.asarray(self.phis, dtype=float))
        out = np.atleast_1d(np.asarray(self.output_phases, dtype=float))
        if self.m < 1:
            raise DimensionError(f"mode count must be >= 1, got {self.m}")
        if thetas.shape != (n_pairs,) or phis.shape != (n_pairs,):
            raise DimensionError(
                f"m={self.m} needs {n_pairs} thetas and phis, "
                f"got {thetas.shape} and {phis.shape}"
            )
        if out.shape != (self.m,):
            raise DimensionError(f"m={self.m} needs {self.m} output phases, got {out.shape}")
        if n_pairs and (thetas.min() < 0 or thetas.max() > math.pi / 2):
            raise ValueError("thetas must lie in [0, pi/2]")
        if n_pairs and (phis.min() < 0 or phis.max() >= 2 * math.pi):
            raise ValueError("phis must lie in [0, 2*pi)")
        if out.min() < 0 or out.max() >= 2 * math.pi:
            raise ValueError("output phases must lie in [0, 2*pi)")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "output_phases", out)


def random_reck_params(m: int, rng: np.random.Generator) -> ReckParams:
    """Uniformly random in-range mesh angles (not Haar-weighted)."""
    n_pairs = m * (m - 1) // 2
    return ReckParams(
        m=m,
        thetas=rng.uniform(0.0, math.pi / 2, n_pairs),
        phis=rng.uniform(0.0, 2 * math.pi, n_pairs),
        output_phases=rng.uniform(0.0, 2 * math.pi, m),
    )


def _mesh_channels(m: int) -> list[int]:
    # Adjacent-pair channel sequence of the triangular mesh, in synthesis
    # order (reverse of the row-by-row elimination order).
    elimination = [j for i in range(m - 1) for j in range(m - 2, i - 1, -1)]
    return list(reversed(elimination))


def _mesh_unitary(m: int, thetas, phis, output_phases) -> np.ndarray:
    u = np.diag(np.exp(1j * np.asarray(output_phases, dtype=float)))
    for k, ch in enumerate(_mesh_channels(m)):
        c, s = math.cos(thetas[k]), math.sin(thetas[k])
        eip = complex(math.cos(phis[k]), math.sin(phis[k]))
        t = np.eye(m, dtype=complex)
        t[ch, ch] = eip * c
        t[ch, ch + 1] = -s
        t[ch + 1, ch] = eip * s
        t[ch + 1, ch + 1] = c
        u = u @ t
    return u


def reck_to_unitary(params: ReckParams) -> np.ndarray:
    """Unitary realized by the triangular mesh; unitary by construction."""
    return _mesh_unitary(params.m, params.thetas, params.phis, params.output_phases)


def direct_sum(a, b) -> np.ndarray:
    """Block-diagonal composition of two matrices."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError("direct_sum expects two 2-D matrices")
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=complex)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0] :, a.shape[1] :] = b
    return out


def phase_shifter(m: int, mode: int, phi: float) -> np.ndarray:
    """Identity except entry (mode, mode) = exp(-i*phi); mode is 1-based."""
    if not 1 <= mode <= m:
        raise DimensionError(f"mode {mode} out of range [1, {m}]")
    f = np.eye(m, dtype=complex)
    f[mode - 1, mode - 1] = complex(math.cos(phi), -math.sin(phi))
    return f


def matmul(a, b) -> np.ndarray:
    """Matrix product with a dimension check; 'A then B' composes as A @ B."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b


# ---------------------------------------------------------------------------
# JSON wire format: {"rows": r, "cols": c, "data": [[re, im], ...]} row-major
# ---------------------------------------------------------------------------

def matrix_to_json(mat) -> dict:
    a = np.asarray(mat, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    data = [[float(v.real), float(v.imag)] for v in a.reshape(-1)]
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]), "data": data}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from None
    if len(data) != rows * cols:
        raise ValueError(
            f"matrix JSON declares {rows}x{cols} but carries {len(data)} entries"
        )
    flat = np.array([complex(re, im) for re, im in data], dtype=complex)
    a = flat.reshape(rows, cols)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix JSON contains non-finite entries")
    return a


def save_matrix(path, mat) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(mat)) + "\n")


def load_matrix(path) -> np.ndarray:
    return matrix_from_json(json.loads(Path(path).read_text()))
