"""Heisenberg spin-chain models and the exact Gibbs-state reference.

Sites are numbered 0..n_sites-1.  A model is an open chain with one
Hermitian 4x4 coupling term per nearest-neighbour bond; bond k couples
sites (k, k+1) with the left site in the first tensor slot.  The exchange
term uses the Pauli-matrix convention (not spin-1/2 operators), coupling
strength 1 unless a per-bond coupling is given; any other convention only
rescales the inverse temperature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)


def heisenberg_term() -> np.ndarray:
    """Two-site exchange term sx.sx + sy.sy + sz.sz (4x4, real symmetric)."""
    return (
        linalg.kron(SIGMA_X, SIGMA_X)
        + linalg.kron(SIGMA_Y, SIGMA_Y)
        + linalg.kron(SIGMA_Z, SIGMA_Z)
    )


@dataclass(frozen=True)
class SpinChainModel:
    """Open qubit chain with nearest-neighbour bond terms and a temperature.

    ``terms[k]`` is the Hermitian 4x4 operator on sites (k, k+1); ``beta``
    is the inverse temperature of the Gibbs state exp(-beta H) / Z.
    """

    n_sites: int
    terms: tuple
    beta: float

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError(f"n_sites must be positive, got {self.n_sites}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if len(self.terms) != self.n_sites - 1:
            raise ValueError(
                f"expected {self.n_sites - 1} bond terms for {self.n_sites} sites, "
                f"got {len(self.terms)}"
            )
        checked = tuple(linalg.require_hermitian(t) for t in self.terms)
        for k, t in enumerate(checked):
            if t.shape != (4, 4):
                raise ValueError(f"bond term {k} must be 4x4, got {t.shape}")
        object.__setattr__(self, "terms", checked)
        object.__setattr__(self, "beta", float(self.beta))


def heisenberg_chain(
    n_sites: int, beta: float, couplings: Sequence[float] | None = None
) -> SpinChainModel:
    """Isotropic Heisenberg chain; optional per-bond couplings J_k (default 1)."""
    base = heisenberg_term()
    if couplings is None:
        couplings = [1.0] * (n_sites - 1)
    couplings = [float(j) for j in couplings]
    if len(couplings) != n_sites - 1:
        raise ValueError(
            f"expected {n_sites - 1} couplings for {n_sites} sites, got {len(couplings)}"
        )
    return SpinChainModel(n_sites, tuple(j * base for j in couplings), beta)


def embed_term(term, pair: tuple[int, int], n_sites: int) -> np.ndarray:
    """Embed a 4x4 bond term on sites ``pair`` = (i, i+1) into the full chain.

    Returns I^(i) kron term kron I^(n-i-2), a 2^n x 2^n matrix.
    """
    i, j = pair
    if j != i + 1 or i < 0 or j >= n_sites:
        raise ValueError(f"pair {pair} is not a nearest-neighbour bond of {n_sites} sites")
    t = linalg.as_complex_matrix(term)
    if t.shape != (4, 4):
        raise ValueError(f"bond term must be 4x4, got {t.shape}")
    left = np.eye(2**i, dtype=np.complex128)
    right = np.eye(2 ** (n_sites - i - 2), dtype=np.complex128)
    return linalg.kron(linalg.kron(left, t), right)


def total_hamiltonian(model: SpinChainModel) -> np.ndarray:
    """Sum of all embedded bond terms."""
    dim = 2**model.n_sites
    h = np.zeros((dim, dim), dtype=np.complex128)
    for k, term in enumerate(model.terms):
        h += embed_term(term, (k, k + 1), model.n_sites)
    return h


def exact_gibbs(model: SpinChainModel) -> np.ndarray:
    """exp(-beta H) / tr exp(-beta H) by full diagonalization.

    The spectrum is shifted by its minimum before exponentiating so large
    beta cannot overflow; the shift cancels in the normalization.
    """
    eig = linalg.herm_eig(total_hamiltonian(model))
    w = np.exp(-model.beta * (eig.eigenvalues - eig.eigenvalues.min()))
    rho = (eig.eigenvectors * w) @ eig.eigenvectors.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key=value`` lines; blank lines and '#' comments are skipped."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key in {raw!r}")
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def couplings_from_keys(keys: dict[str, str], sites: int) -> list[float]:
    """Per-bond couplings from ``J_<i>`` keys, 1-based bond index, default 1."""
    couplings = [1.0] * (sites - 1)
    for key, value in keys.items():
        if not key.startswith("J_"):
            continue
        try:
            bond = int(key[2:])
        except ValueError:
            raise ValueError(f"field {key!r}: bond index is not an integer") from None
        if not 1 <= bond <= sites - 1:
            raise ValueError(f"field {key!r}: bond index out of range 1..{sites - 1}")
        try:
            couplings[bond - 1] = float(value)
        except ValueError:
            raise ValueError(f"field {key!r}: not a number: {value!r}") from None
    return couplings


def model_from_keys(keys: dict[str, str]) -> SpinChainModel:
    """Build a model from the plain-text description format.

    Recognized keys: ``model=heisenberg``, ``sites=<int>``, ``beta=<float>``
    and optional per-bond couplings ``J_<i>=<float>`` where i is the 1-based
    bond index (bond i couples sites i and i+1 in 1-based labels).
    """
    kind = keys.get("model", "heisenberg")
    if kind != "heisenberg":
        raise ValueError(f"unsupported model {kind!r}; only 'heisenberg' is available")
    try:
        sites = int(keys["sites"])
    except KeyError:
        raise ValueError("model description is missing the 'sites' key") from None
    except ValueError:
        raise ValueError(f"field 'sites': not an integer: {keys['sites']!r}") from None
    try:
        beta = float(keys.get("beta", "1.0"))
    except ValueError:
        raise ValueError(f"field 'beta': not a number: {keys['beta']!r}") from None
    return heisenberg_chain(sites, beta, couplings_from_keys(keys, sites))


def load_model(path) -> SpinChainModel:
    """Read a model description file (see ``model_from_keys``)."""
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_keys(parse_key_values(fh.read()))
