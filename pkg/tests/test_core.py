import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectra_shrink import (
    ContributionRates,
    SampleDecomposition,
    ScatterSample,
    Spectrum,
    contribution_rates,
    eigh_descending_batch,
    symmetric_eigendecompose,
)

# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


def test_spectrum_validation():
    Spectrum((3.0, 1.0))
    with pytest.raises(ValueError):
        Spectrum((1.0,))
    with pytest.raises(ValueError):
        Spectrum((1.0, -1.0))
    with pytest.raises(ValueError):
        Spectrum((1.0, 2.0))
    with pytest.raises(ValueError):
        Spectrum((1.0, 0.0))
    with pytest.raises(ValueError):
        Spectrum((np.inf, 1.0))


def test_spectrum_immutable():
    s = Spectrum((3.0, 1.0))
    with pytest.raises(ValueError):
        s.values[0] = 5.0


def test_rates_validation():
    ContributionRates((0.5, 0.5))
    with pytest.raises(ValueError):
        ContributionRates((1.0, 0.0))
    with pytest.raises(ValueError):
        ContributionRates((0.9,))


def test_scatter_sample_rejects_asymmetry():
    with pytest.raises(ValueError, match="not symmetric"):
        ScatterSample(np.array([[1.0, 0.5], [0.4999, 1.0]]), dof=5)
    # tiny asymmetry within tolerance is accepted
    m = np.array([[1.0, 0.5], [0.5 + 1e-12, 1.0]])
    ScatterSample(m, dof=5)
    with pytest.raises(ValueError):
        ScatterSample(np.eye(2), dof=0)
    with pytest.raises(ValueError):
        ScatterSample(np.ones((2, 3)), dof=5)


# ---------------------------------------------------------------------------
# contribution rates
# ---------------------------------------------------------------------------


def test_contribution_rates_examples():
    case1 = Spectrum((19.0,) * 5 + (1.0,) * 5)
    np.testing.assert_allclose(contribution_rates(case1).rates, [0.19] * 5 + [0.01] * 5)
    np.testing.assert_allclose(contribution_rates(Spectrum((1.0, 1.0))).rates, [0.5, 0.5])
    np.testing.assert_allclose(contribution_rates(Spectrum((3.0, 1.0))).rates, [0.75, 0.25])


@given(
    values=st.lists(st.floats(0.01, 1e6), min_size=2, max_size=12),
    scale=st.floats(1e-6, 1e6),
)
def test_contribution_rates_scale_invariant(values, scale):
    base = Spectrum(sorted(values, reverse=True))
    scaled = Spectrum(base.values * scale)
    np.testing.assert_allclose(
        contribution_rates(base).rates, contribution_rates(scaled).rates, atol=1e-14, rtol=0
    )


def test_contribution_rates_sum_to_one():
    rng = np.random.default_rng(0)
    for _ in range(50):
        values = np.sort(rng.uniform(0.1, 10.0, size=rng.integers(2, 15)))[::-1]
        rates = contribution_rates(Spectrum(values)).rates
        assert abs(rates.sum() - 1.0) <= 1e-12


# ---------------------------------------------------------------------------
# eigendecomposition
# ---------------------------------------------------------------------------


def test_eigendecompose_diagonal():
    dec = symmetric_eigendecompose(ScatterSample(np.diag([4.0, 1.0]), dof=10))
    np.testing.assert_allclose(dec.eigenvalues, [4.0, 1.0])
    np.testing.assert_allclose(dec.rates, [0.8, 0.2])
    np.testing.assert_allclose(dec.eigenvectors, np.eye(2))


def test_eigendecompose_identity():
    dec = symmetric_eigendecompose(ScatterSample(np.eye(3), dof=10))
    np.testing.assert_allclose(dec.eigenvalues, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(dec.rates, [1 / 3] * 3)


def test_eigendecompose_2x2_hand_solved():
    # characteristic polynomial of [[2,1],[1,2]]: roots 3 and 1
    dec = symmetric_eigendecompose(ScatterSample(np.array([[2.0, 1.0], [1.0, 2.0]]), dof=10))
    np.testing.assert_allclose(dec.eigenvalues, [3.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(dec.rates, [0.75, 0.25], atol=1e-12)
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(dec.eigenvectors[:, 0], [r, r], atol=1e-12)
    np.testing.assert_allclose(dec.eigenvectors[:, 1], [r, -r], atol=1e-12)


def _random_psd(rng, p):
    a = rng.standard_normal((p, p))
    return a @ a.T + 0.1 * np.eye(p)


def test_round_trip_orthogonality_and_rates():
    rng = np.random.default_rng(7)
    for _ in range(40):
        p = int(rng.integers(2, 21))
        s = _random_psd(rng, p)
        dec = symmetric_eigendecompose(ScatterSample(s, dof=p + 5))
        h, l = dec.eigenvectors, dec.eigenvalues
        assert np.linalg.norm((h * l) @ h.T - s) / np.linalg.norm(s) < 1e-8
        assert np.abs(h.T @ h - np.eye(p)).max() < 1e-8
        assert abs(dec.rates.sum() - 1.0) <= 1e-12
        assert np.all(np.diff(l) <= 0)


def test_matches_lapack_eigenvalues():
    rng = np.random.default_rng(11)
    mats = np.stack([_random_psd(rng, 8) for _ in range(64)])
    w_ours, v_ours = eigh_descending_batch(mats)
    w_ref = np.linalg.eigvalsh(mats)[:, ::-1]
    np.testing.assert_allclose(w_ours, w_ref, rtol=1e-10, atol=1e-10)
    # eigenvectors agree up to the sign canonicalization
    recon = np.einsum("bik,bk,bjk->bij", v_ours, w_ours, v_ours)
    np.testing.assert_allclose(recon, mats, rtol=0, atol=1e-10 * np.abs(mats).max())


def test_deterministic_and_sign_canonical():
    rng = np.random.default_rng(3)
    s = _random_psd(rng, 6)
    d1 = symmetric_eigendecompose(ScatterSample(s, dof=10))
    d2 = symmetric_eigendecompose(ScatterSample(s, dof=10))
    assert np.array_equal(d1.eigenvectors, d2.eigenvectors)
    assert np.array_equal(d1.eigenvalues, d2.eigenvalues)
    for col in d1.eigenvectors.T:
        assert col[np.argmax(np.abs(col))] > 0


def test_sweep_cap_error_names_cap():
    s = np.array([[2.0, 1.0], [1.0, 2.0]])
    with pytest.raises(RuntimeError, match="0-sweep"):
        eigh_descending_batch(s[None], max_sweeps=0)


def test_rejects_non_positive_definite():
    with pytest.raises(ValueError, match="positive definite"):
        symmetric_eigendecompose(ScatterSample(np.diag([1.0, -2.0]), dof=5))


def test_batch_shape_validation():
    with pytest.raises(ValueError):
        eigh_descending_batch(np.eye(3))


def test_decomposition_type_invariants():
    with pytest.raises(ValueError, match="orthogonal"):
        SampleDecomposition(
            eigenvalues=np.array([2.0, 1.0]),
            rates=np.array([2 / 3, 1 / 3]),
            eigenvectors=np.array([[1.0, 0.1], [0.0, 1.0]]),
        )
    with pytest.raises(ValueError, match="rates"):
        SampleDecomposition(
            eigenvalues=np.array([2.0, 1.0]),
            rates=np.array([0.5, 0.5]),
            eigenvectors=np.eye(2),
        )


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.integers(2, 10))
def test_round_trip_property(seed, p):
    rng = np.random.default_rng(seed)
    s = _random_psd(rng, p)
    dec = symmetric_eigendecompose(ScatterSample(s, dof=p + 2))
    h, l = dec.eigenvectors, dec.eigenvalues
    assert np.linalg.norm((h * l) @ h.T - s) / np.linalg.norm(s) < 1e-8
