"""Model construction, Hamiltonian assembly, and the exact Gibbs reference."""

import numpy as np
import pytest

from spinbp import linalg, spinchain
from spinbp.spinchain import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    SpinChainModel,
    embed_term,
    exact_gibbs,
    heisenberg_chain,
    heisenberg_term,
    total_hamiltonian,
)

I2 = np.eye(2, dtype=complex)


def test_heisenberg_term_structure():
    h = heisenberg_term()
    np.testing.assert_allclose(np.diag(h), [1, -1, -1, 1], atol=1e-15)
    assert h[1, 2] == pytest.approx(2.0)
    assert h[2, 1] == pytest.approx(2.0)
    np.testing.assert_allclose(h, h.conj().T, atol=1e-15)
    # off-diagonal mass sits only on the flip-flop entries
    mask = np.ones((4, 4), bool)
    mask[np.diag_indices(4)] = False
    mask[1, 2] = mask[2, 1] = False
    assert np.abs(h[mask]).max() == 0.0


def test_heisenberg_term_spectrum():
    # singlet -3, triplet +1 (derived via the charpoly oracle in test_linalg)
    np.testing.assert_allclose(
        linalg.herm_eig(heisenberg_term()).eigenvalues, [-3, 1, 1, 1], atol=1e-12
    )


def test_embed_first_bond_is_term_kron_identity():
    h = heisenberg_term()
    np.testing.assert_allclose(embed_term(h, (0, 1), 3), np.kron(h, I2), atol=1e-15)


def test_embed_second_bond_is_identity_kron_term():
    h = heisenberg_term()
    np.testing.assert_allclose(embed_term(h, (1, 2), 3), np.kron(I2, h), atol=1e-15)


def test_embed_identity_two_sites():
    np.testing.assert_allclose(embed_term(np.eye(4), (0, 1), 2), np.eye(4), atol=1e-15)


def test_embed_rejects_bad_pairs():
    h = heisenberg_term()
    for pair in [(2, 3), (-1, 0), (0, 2), (1, 0)]:
        with pytest.raises(ValueError):
            embed_term(h, pair, 3)


def test_total_hamiltonian_three_sites():
    model = heisenberg_chain(3, 1.0)
    h = heisenberg_term()
    h12 = np.kron(h, I2)
    h23 = np.kron(I2, h)
    ham = total_hamiltonian(model)
    np.testing.assert_allclose(ham, h12 + h23, atol=1e-14)
    assert abs(np.trace(ham)) < 1e-12
    # the bond terms genuinely fail to commute
    comm = h12 @ h23 - h23 @ h12
    assert np.linalg.norm(comm) > 1.0


def test_total_hamiltonian_two_sites_is_the_term():
    np.testing.assert_allclose(
        total_hamiltonian(heisenberg_chain(2, 0.7)), heisenberg_term(), atol=1e-15
    )


def test_exact_gibbs_infinite_temperature():
    for sites in (2, 3, 4):
        rho = exact_gibbs(heisenberg_chain(sites, 0.0))
        np.testing.assert_allclose(rho, np.eye(2**sites) / 2**sites, atol=1e-14)


def test_exact_gibbs_low_temperature_projects_on_singlet():
    # analytic ground state of the two-site exchange term: (|01> - |10>)/sqrt(2)
    singlet = np.zeros(4, dtype=complex)
    singlet[1], singlet[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    projector = np.outer(singlet, singlet.conj())
    rho = exact_gibbs(heisenberg_chain(2, 50.0))
    overlap = float(np.real(singlet.conj() @ rho @ singlet))
    assert overlap > 1 - 1e-6
    np.testing.assert_allclose(rho, projector, atol=1e-6)


def test_exact_gibbs_eigenvalues_are_softmax():
    model = heisenberg_chain(3, 1.3)
    spectrum = linalg.herm_eig(total_hamiltonian(model)).eigenvalues
    weights = np.exp(-model.beta * (spectrum - spectrum.min()))
    weights /= weights.sum()
    got = np.sort(linalg.herm_eig(exact_gibbs(model)).eigenvalues)
    np.testing.assert_allclose(got, np.sort(weights), atol=1e-10)


def test_exact_gibbs_is_a_density_matrix():
    for beta in (0.0, 0.5, 2.0, 10.0):
        rho = exact_gibbs(heisenberg_chain(3, beta))
        assert abs(np.trace(rho).real - 1) < 1e-12
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-14)
        assert linalg.herm_eig(rho).eigenvalues.min() >= -1e-12


def test_model_validation():
    with pytest.raises(ValueError):
        SpinChainModel(3, (heisenberg_term(),), 1.0)  # wrong term count
    with pytest.raises(ValueError):
        heisenberg_chain(3, -0.5)
    with pytest.raises(linalg.NotHermitianError):
        SpinChainModel(2, (np.triu(np.ones((4, 4))),), 1.0)


def test_per_bond_couplings_scale_terms():
    model = heisenberg_chain(3, 1.0, couplings=[2.0, 0.5])
    np.testing.assert_allclose(model.terms[0], 2.0 * heisenberg_term(), atol=1e-15)
    np.testing.assert_allclose(model.terms[1], 0.5 * heisenberg_term(), atol=1e-15)


def test_parse_key_values():
    text = "# comment\nmodel = heisenberg\nsites=3\n\nbeta = 1.5  # inline\n"
    assert spinchain.parse_key_values(text) == {
        "model": "heisenberg",
        "sites": "3",
        "beta": "1.5",
    }
    with pytest.raises(ValueError, match="line 1"):
        spinchain.parse_key_values("not a key value pair")
    with pytest.raises(ValueError, match="duplicate"):
        spinchain.parse_key_values("a=1\na=2")


def test_model_from_keys():
    model = spinchain.model_from_keys(
        {"model": "heisenberg", "sites": "3", "beta": "0.7", "J_2": "0.25"}
    )
    assert model.n_sites == 3
    assert model.beta == pytest.approx(0.7)
    np.testing.assert_allclose(model.terms[1], 0.25 * heisenberg_term(), atol=1e-15)

    with pytest.raises(ValueError, match="sites"):
        spinchain.model_from_keys({"model": "heisenberg"})
    with pytest.raises(ValueError, match="unsupported model"):
        spinchain.model_from_keys({"model": "ising", "sites": "3"})
    with pytest.raises(ValueError, match="out of range"):
        spinchain.model_from_keys({"sites": "3", "J_5": "1.0"})
    with pytest.raises(ValueError, match="not a number"):
        spinchain.model_from_keys({"sites": "3", "beta": "fast"})


def test_load_model(tmp_path):
    path = tmp_path / "chain.cfg"
    path.write_text("model=heisenberg\nsites=4\nbeta=2.0\n", encoding="utf-8")
    model = spinchain.load_model(path)
    assert model.n_sites == 4
    assert model.beta == pytest.approx(2.0)
