import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glassokit.datagen import gen_ar2_precision
from glassokit.linalg import (
    NotPositiveDefiniteError,
    chol,
    load_csv,
    load_matrix_csv,
    logdet_spd,
    min_eigenvalue,
    partition_column,
    reassemble,
    rel_frobenius_diff,
    save_csv,
    save_matrix_csv,
    solve_spd,
    spd_inverse,
    validate_symmetric,
)

from oracles import (
    det_laplace,
    gauss_jordan_inverse,
    jacobi_eigenvalues,
    make_spd,
    make_symmetric,
)


# ---------------------------------------------------------------- validation

def test_validate_symmetric_accepts_and_symmetrizes():
    a = np.array([[1.0, 2.0], [2.0, 3.0]])
    out = validate_symmetric(a)
    assert np.array_equal(out, out.T)
    assert np.array_equal(out, a)


def test_validate_symmetric_rejects_asymmetry():
    a = np.array([[1.0, 2.0], [2.1, 3.0]])
    with pytest.raises(ValueError, match="not symmetric"):
        validate_symmetric(a)


def test_validate_symmetric_rejects_nonsquare():
    with pytest.raises(ValueError):
        validate_symmetric(np.ones((2, 3)))


def test_validate_symmetric_tolerates_roundoff():
    a = make_spd(6, seed=0)
    b = a + 1e-15 * np.triu(np.ones_like(a), 1)
    out = validate_symmetric(b)
    assert np.array_equal(out, out.T)


# ---------------------------------------------------------------- partition

def test_partition_2x2():
    m = np.array([[1.0, 2.0], [2.0, 5.0]])
    part = partition_column(m, 1)
    assert part.block11.shape == (1, 1)
    assert part.block11[0, 0] == 1.0
    assert part.vec12[0] == 2.0
    assert part.scalar22 == 5.0


def test_partition_identity_middle_column():
    part = partition_column(np.eye(3), 1)
    assert np.array_equal(part.block11, np.eye(2))
    assert np.array_equal(part.vec12, np.zeros(2))
    assert part.scalar22 == 1.0


def test_partition_rejects_bad_index():
    with pytest.raises(ValueError):
        partition_column(np.eye(3), 3)
    with pytest.raises(ValueError):
        partition_column(np.eye(3), -1)
    with pytest.raises(ValueError):
        partition_column(np.eye(1), 0)


@settings(deadline=None, max_examples=40)
@given(p=st.integers(2, 8), seed=st.integers(0, 10_000), k_raw=st.integers(0, 7))
def test_partition_round_trip_bit_exact(p, seed, k_raw):
    m = make_symmetric(p, seed)
    k = k_raw % p
    assert np.array_equal(reassemble(partition_column(m, k)), m)


def test_partition_round_trip_large():
    m = make_symmetric(200, seed=5)
    for k in (0, 117, 199):
        assert np.array_equal(reassemble(partition_column(m, k)), m)


# ---------------------------------------------------------------- cholesky

def test_chol_scaled_identity_exact():
    f = chol(4.0 * np.eye(2))
    assert np.array_equal(f.lower, 2.0 * np.eye(2))


def test_chol_near_singular_still_succeeds():
    f = chol(np.array([[1.0, 0.999], [0.999, 1.0]]))
    a = f.lower @ f.lower.T
    assert np.allclose(a, [[1.0, 0.999], [0.999, 1.0]], atol=1e-14)


def test_chol_indefinite_reports_pivot():
    with pytest.raises(NotPositiveDefiniteError) as err:
        chol(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert err.value.pivot == 1


def test_chol_rejects_zero_matrix():
    with pytest.raises(NotPositiveDefiniteError):
        chol(np.zeros((3, 3)))


def test_chol_reconstruction_conditioned():
    # spectrum spread over six orders of magnitude
    rng = np.random.default_rng(11)
    q, _ = np.linalg.qr(rng.standard_normal((12, 12)))
    spd = (q * np.logspace(-3, 3, 12)) @ q.T
    spd = 0.5 * (spd + spd.T)
    f = chol(spd)
    assert rel_frobenius_diff(f.lower @ f.lower.T, spd) <= 1e-10


@pytest.mark.parametrize("p,seed", [(3, 0), (8, 1), (20, 2)])
def test_solve_spd_matches_gauss_jordan(p, seed):
    a = make_spd(p, seed)
    b = np.random.default_rng(seed + 100).standard_normal(p)
    x = solve_spd(chol(a), b)
    assert np.max(np.abs(x - gauss_jordan_inverse(a) @ b)) <= 1e-8


def test_solve_spd_identity_rhs_gives_inverse():
    a = make_spd(10, seed=3)
    inv = spd_inverse(chol(a))
    assert np.max(np.abs(inv @ a - np.eye(10))) <= 1e-10
    assert np.array_equal(inv, inv.T)


def test_solve_spd_shape_mismatch():
    with pytest.raises(ValueError):
        solve_spd(chol(np.eye(3)), np.ones(4))


# ---------------------------------------------------------------- logdet

def test_logdet_identity_zero():
    assert logdet_spd(chol(np.eye(4))) == 0.0


def test_logdet_scaled_identity():
    assert logdet_spd(chol(2.0 * np.eye(3))) == pytest.approx(3 * np.log(2.0), abs=1e-14)


def test_logdet_matches_laplace_expansion():
    a = make_spd(5, seed=7)
    assert logdet_spd(chol(a)) == pytest.approx(np.log(det_laplace(a)), abs=1e-10)


def test_logdet_inverse_cancels():
    a = make_spd(20, seed=9)
    inv = spd_inverse(chol(a))
    assert abs(logdet_spd(chol(a)) + logdet_spd(chol(inv))) <= 1e-8


# ---------------------------------------------------------------- min eigenvalue

def test_min_eigenvalue_diagonal():
    assert min_eigenvalue(np.diag([1.0, 2.0, 3.0])) == pytest.approx(1.0, abs=1e-8)


def test_min_eigenvalue_indefinite():
    assert min_eigenvalue(np.array([[1.0, 2.0], [2.0, 1.0]])) == pytest.approx(-1.0, abs=1e-8)


def test_min_eigenvalue_zero_matrix():
    assert min_eigenvalue(np.zeros((4, 4))) == 0.0


def test_min_eigenvalue_vs_jacobi_ar2():
    theta = gen_ar2_precision(50).theta_star
    lo = jacobi_eigenvalues(theta)[0]
    assert min_eigenvalue(theta) == pytest.approx(lo, abs=1e-6)


@pytest.mark.parametrize("seed", range(6))
def test_min_eigenvalue_vs_lapack(seed):
    a = make_symmetric(25, seed, scale=2.0)
    assert min_eigenvalue(a) == pytest.approx(np.linalg.eigvalsh(a)[0], abs=1e-7)


@pytest.mark.parametrize("seed", range(4))
def test_min_eigenvalue_sign_agrees_with_chol(seed):
    a = make_symmetric(15, seed)
    spd = True
    try:
        chol(a)
    except NotPositiveDefiniteError:
        spd = False
    assert (min_eigenvalue(a) > 0) == spd


# ---------------------------------------------------------------- frobenius

def test_rel_frobenius_identical_is_zero():
    a = make_spd(6, seed=1)
    assert rel_frobenius_diff(a, a) == 0.0


def test_rel_frobenius_doubling():
    assert rel_frobenius_diff(2.0 * np.eye(3), np.eye(3)) == pytest.approx(1.0, abs=1e-15)


def test_rel_frobenius_elementwise_oracle():
    a, b = make_symmetric(5, 1), make_symmetric(5, 2)
    num = np.sqrt(sum((a[i, j] - b[i, j]) ** 2 for i in range(5) for j in range(5)))
    den = np.sqrt(sum(b[i, j] ** 2 for i in range(5) for j in range(5)))
    assert rel_frobenius_diff(a, b) == pytest.approx(num / den, rel=1e-12)


def test_rel_frobenius_zero_reference_rejected():
    with pytest.raises(ValueError):
        rel_frobenius_diff(np.eye(2), np.zeros((2, 2)))


def test_rel_frobenius_shape_mismatch():
    with pytest.raises(ValueError):
        rel_frobenius_diff(np.eye(2), np.eye(3))


# ---------------------------------------------------------------- csv io

def test_matrix_csv_round_trip_bit_exact(tmp_path):
    m = make_spd(7, seed=4)
    path = tmp_path / "m.csv"
    save_matrix_csv(path, m, header="sample covariance\np=7")
    again = load_matrix_csv(path)
    assert np.array_equal(again, m)
    text = path.read_text()
    assert text.startswith("# sample covariance\n# p=7\n")


def test_csv_rectangular_round_trip(tmp_path):
    y = np.random.default_rng(0).standard_normal((5, 3))
    path = tmp_path / "y.csv"
    save_csv(path, y)
    assert np.array_equal(load_csv(path), y)


def test_load_matrix_csv_rejects_asymmetric(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1.0,2.0\n2.5,1.0\n")
    with pytest.raises(ValueError, match="not symmetric"):
        load_matrix_csv(path)


def test_load_matrix_csv_p1(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("# scalar\n3.5\n")
    assert np.array_equal(load_matrix_csv(path), np.array([[3.5]]))


def test_load_csv_rejects_ragged(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("1.0,2.0\n3.0\n")
    with pytest.raises(ValueError, match="ragged"):
        load_csv(path)


def test_save_matrix_csv_validates(tmp_path):
    with pytest.raises(ValueError):
        save_matrix_csv(tmp_path / "x.csv", np.array([[1.0, 2.0], [3.0, 4.0]]))
