import json
import math

import numpy as np
import pytest

from nlboson import (
    DimensionError,
    ReckParams,
    direct_sum,
    gathered_permanents,
    haar_unitary,
    matmul,
    matrix_from_json,
    matrix_from_states,
    matrix_to_json,
    permanent,
    permanent_naive,
    permanents,
    phase_shifter,
    random_reck_params,
    reck_to_unitary,
    unitarity_deviation,
)

from .oracles import operator_expansion_amplitude


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# ---------------------------------------------------------------------------
# permanents
# ---------------------------------------------------------------------------

def test_permanent_identity():
    assert permanent(np.eye(3)) == pytest.approx(1.0)


def test_permanent_all_ones_is_factorial():
    assert permanent(np.ones((4, 4))) == pytest.approx(24.0)


def test_permanent_two_by_two_by_definition():
    assert permanent(np.array([[1.0, 2.0], [3.0, 4.0]])) == pytest.approx(10.0)


def test_permanent_empty_matrix_is_one():
    assert permanent(np.zeros((0, 0))) == 1
    assert permanent_naive(np.zeros((0, 0))) == 1


def test_permanent_balanced_beamsplitter_cancels():
    b = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert permanent(b) == pytest.approx(0.0, abs=1e-15)


def test_permanent_matches_naive_oracle():
    rng = np.random.default_rng(7)
    for size in range(1, 8):
        for _ in range(8):
            mat = random_complex(rng, (size, size))
            assert permanent(mat) == pytest.approx(permanent_naive(mat), abs=1e-10)


def test_permanent_row_and_column_permutation_invariant():
    rng = np.random.default_rng(8)
    mat = random_complex(rng, (5, 5))
    base = permanent(mat)
    for _ in range(5):
        rows = rng.permutation(5)
        cols = rng.permutation(5)
        assert permanent(mat[rows][:, cols]) == pytest.approx(base, abs=1e-10)


def test_permanent_linear_in_each_row():
    rng = np.random.default_rng(9)
    for _ in range(5):
        mat = random_complex(rng, (4, 4))
        row = int(rng.integers(4))
        c = complex(rng.standard_normal(), rng.standard_normal())
        scaled = mat.copy()
        scaled[row] *= c
        assert permanent(scaled) == pytest.approx(c * permanent(mat), abs=1e-10)


def test_permanent_rejects_non_square():
    with pytest.raises(DimensionError):
        permanent(np.ones((2, 3)))
    with pytest.raises(DimensionError):
        permanent_naive(np.ones((2, 3)))


def test_naive_oracle_guard():
    with pytest.raises(DimensionError):
        permanent_naive(np.eye(10))


def test_permanent_rejects_non_finite():
    mat = np.eye(3, dtype=complex)
    mat[0, 0] = np.nan
    with pytest.raises(ValueError):
        permanent(mat)


def test_batch_permanents_match_scalar_kernel():
    rng = np.random.default_rng(10)
    for size in (1, 2, 4, 6):
        mats = random_complex(rng, (12, size, size))
        batch = permanents(mats)
        ref = np.array([permanent(mm) for mm in mats])
        assert np.abs(batch - ref).max() < 1e-10


def test_gathered_permanents():
    rng = np.random.default_rng(11)
    u = random_complex(rng, (5, 5))
    rows = np.array([[0, 1, 1], [2, 3, 4]])
    cols = np.array([[1, 1, 2], [0, 2, 2]])
    got = gathered_permanents(u, rows, cols)
    want = [permanent(u[np.ix_(r, c)]) for r, c in zip(rows, cols)]
    assert np.abs(got - np.array(want)).max() < 1e-12
    # a shared row vector broadcasts across the batch
    shared = gathered_permanents(u, np.array([0, 1, 2]), cols)
    want = [permanent(u[np.ix_([0, 1, 2], c)]) for c in cols]
    assert np.abs(shared - np.array(want)).max() < 1e-12


# ---------------------------------------------------------------------------
# submatrix construction
# ---------------------------------------------------------------------------

def test_matrix_from_states_identity_selection():
    assert np.allclose(matrix_from_states(np.eye(2), (1, 1), (1, 1)), np.eye(2))


def test_matrix_from_states_repeats_rows_and_columns():
    u = np.arange(4).reshape(2, 2) + 1.0
    sub = matrix_from_states(u, (2, 0), (1, 1))
    assert np.allclose(sub, [[u[0, 0], u[0, 1]], [u[0, 0], u[0, 1]]])


def test_matrix_from_states_reproduces_operator_oracle():
    # two-photon amplitudes on two modes, checked against the expansion oracle
    rng = np.random.default_rng(12)
    u = haar_unitary(2, rng)
    for s in [(2, 0), (1, 1), (0, 2)]:
        for t in [(2, 0), (1, 1), (0, 2)]:
            sub = matrix_from_states(u, s, t)
            norm = math.sqrt(
                math.prod(math.factorial(c) for c in s)
                * math.prod(math.factorial(c) for c in t)
            )
            amp = permanent(sub) / norm
            assert amp == pytest.approx(operator_expansion_amplitude(u, s, t), abs=1e-12)


def test_matrix_from_states_rejects_photon_mismatch():
    with pytest.raises(DimensionError):
        matrix_from_states(np.eye(2), (2, 0), (1, 0))


# ---------------------------------------------------------------------------
# Haar sampling
# ---------------------------------------------------------------------------

def test_haar_unitary_is_unitary():
    rng = np.random.default_rng(13)
    for m in (1, 2, 5, 9):
        assert unitarity_deviation(haar_unitary(m, rng)) < 1e-12


def test_haar_single_mode_is_a_phase():
    u = haar_unitary(1, np.random.default_rng(14))
    assert abs(abs(u[0, 0]) - 1.0) < 1e-12


def test_haar_deterministic_given_seed():
    a = haar_unitary(4, np.random.default_rng(15))
    b = haar_unitary(4, np.random.default_rng(15))
    assert np.array_equal(a, b)


def test_haar_first_column_moments():
    # each |U_{i1}|^2 averages to 1/m over the ensemble
    rng = np.random.default_rng(16)
    m, draws = 4, 1000
    samples = np.empty((draws, m))
    for i in range(draws):
        samples[i] = np.abs(haar_unitary(m, rng)[:, 0]) ** 2
    mean = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=1) / math.sqrt(draws)
    assert np.all(np.abs(mean - 1 / m) <= 3 * stderr)


# ---------------------------------------------------------------------------
# mesh parametrization
# ---------------------------------------------------------------------------

def test_mesh_identity_at_zero_angles():
    params = ReckParams(3, np.zeros(3), np.zeros(3), np.zeros(3))
    assert np.allclose(reck_to_unitary(params), np.eye(3))


def test_mesh_balanced_beamsplitter():
    params = ReckParams(2, np.array([math.pi / 4]), np.zeros(1), np.zeros(2))
    u = reck_to_unitary(params)
    assert unitarity_deviation(u) < 1e-12
    assert np.allclose(np.abs(u), np.full((2, 2), 1 / math.sqrt(2)))


def test_mesh_random_params_unitary():
    rng = np.random.default_rng(17)
    for m in (2, 3, 5):
        for _ in range(5):
            u = reck_to_unitary(random_reck_params(m, rng))
            assert unitarity_deviation(u) < 1e-12


def test_mesh_parameter_count_validation():
    with pytest.raises(DimensionError):
        ReckParams(3, np.zeros(2), np.zeros(3), np.zeros(3))
    with pytest.raises(DimensionError):
        ReckParams(3, np.zeros(3), np.zeros(3), np.zeros(2))
    with pytest.raises(ValueError):
        ReckParams(2, np.array([math.pi]), np.zeros(1), np.zeros(2))


# ---------------------------------------------------------------------------
# assembly helpers
# ---------------------------------------------------------------------------

def test_direct_sum():
    assert np.allclose(direct_sum(np.eye(2), np.eye(3)), np.eye(5))


def test_phase_shifter():
    f = phase_shifter(3, 2, math.pi)
    assert np.allclose(f, np.diag([1.0, -1.0, 1.0]))
    assert np.allclose(phase_shifter(4, 1, 0.0), np.eye(4))
    with pytest.raises(DimensionError):
        phase_shifter(3, 4, 0.1)


def test_matmul_checks_dimensions():
    with pytest.raises(DimensionError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))
    assert np.allclose(matmul(np.eye(2), np.eye(2)), np.eye(2))


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------

def test_matrix_json_round_trip():
    rng = np.random.default_rng(18)
    mat = random_complex(rng, (3, 2))
    obj = matrix_to_json(mat)
    assert obj["rows"] == 3 and obj["cols"] == 2 and len(obj["data"]) == 6
    assert np.allclose(matrix_from_json(obj), mat)
    # survives a JSON text round trip as well
    assert np.allclose(matrix_from_json(json.loads(json.dumps(obj))), mat)


def test_matrix_json_rejects_malformed():
    with pytest.raises(ValueError):
        matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 0]]})
    with pytest.raises(ValueError):
        matrix_from_json({"rows": 2, "data": []})
