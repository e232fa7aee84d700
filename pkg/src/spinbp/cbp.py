"""Sum-product belief propagation on trees of discrete variables.

Potentials may carry negative entries: on a tree the message recursion is
still an exact contraction, so the normalized "beliefs" are then signed
quasi-marginals rather than probabilities.  Every message is rescaled to
unit absolute sum when it is produced, and the removed positive scale is
accumulated in log form, so arbitrarily long chains neither underflow nor
overflow while the overall normalization stays recoverable.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Brute-force marginalization refuses joints larger than this.
MAX_BRUTE_STATES = 2**24


class NotATreeError(ValueError):
    """The edge set is not a tree (wrong count, cycle, or disconnected)."""


class StateSpaceTooLargeError(ValueError):
    """The joint distribution is too large to enumerate."""


class NotAnEdgeError(ValueError):
    """The requested variable pair is not an edge of the model."""


@dataclass
class FactorChain:
    """Tree-structured pairwise model over discrete variables.

    ``cards[i]`` is the number of states of variable i; ``edges`` holds
    triples (i, j, psi) with psi of shape (cards[i], cards[j]); ``phis``
    are per-variable local potentials (default: all ones).
    """

    cards: Sequence[int]
    edges: Sequence[tuple]
    phis: Sequence[np.ndarray] | None = None

    def __post_init__(self):
        self.cards = tuple(int(c) for c in self.cards)
        if not self.cards or any(c < 1 for c in self.cards):
            raise ValueError(f"cardinalities must be positive, got {self.cards}")
        n = len(self.cards)

        edges = []
        for i, j, psi in self.edges:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError(f"edge ({i}, {j}) is invalid for {n} variables")
            mat = np.asarray(psi, dtype=float)
            if mat.shape != (self.cards[i], self.cards[j]):
                raise ValueError(
                    f"edge ({i}, {j}) potential has shape {mat.shape}, "
                    f"expected {(self.cards[i], self.cards[j])}"
                )
            if not np.all(np.isfinite(mat)):
                raise ValueError(f"edge ({i}, {j}) potential has non-finite entries")
            edges.append((i, j, mat))
        self.edges = tuple(edges)

        if self.phis is None:
            phis = [np.ones(c) for c in self.cards]
        else:
            phis = [np.asarray(p, dtype=float) for p in self.phis]
        if len(phis) != n:
            raise ValueError(f"expected {n} local potentials, got {len(phis)}")
        for i, p in enumerate(phis):
            if p.shape != (self.cards[i],):
                raise ValueError(f"local potential {i} has shape {p.shape}")
            if not np.all(np.isfinite(p)):
                raise ValueError(f"local potential {i} has non-finite entries")
        self.phis = tuple(phis)

        self._adjacency: dict[int, list[int]] = {i: [] for i in range(n)}
        self._edge_index: dict[tuple[int, int], int] = {}
        for idx, (i, j, _) in enumerate(self.edges):
            if (i, j) in self._edge_index or (j, i) in self._edge_index:
                raise NotATreeError(f"duplicate edge between {i} and {j}")
            self._edge_index[(i, j)] = idx
            self._adjacency[i].append(j)
            self._adjacency[j].append(i)
        self._check_tree()

    def _check_tree(self):
        n = len(self.cards)
        if len(self.edges) != n - 1:
            raise NotATreeError(
                f"a tree on {n} variables needs {n - 1} edges, got {len(self.edges)}"
            )
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for u in self._adjacency[v]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        if len(seen) != n:
            raise NotATreeError("edge set is disconnected")

    @property
    def n_vars(self) -> int:
        return len(self.cards)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return tuple(self._adjacency[i])

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self._edge_index or (j, i) in self._edge_index

    def psi_between(self, i: int, j: int) -> np.ndarray:
        """Pairwise potential oriented so axis 0 indexes x_i and axis 1 x_j."""
        if (i, j) in self._edge_index:
            return self.edges[self._edge_index[(i, j)]][2]
        if (j, i) in self._edge_index:
            return self.edges[self._edge_index[(j, i)]][2].T
        raise NotAnEdgeError(f"({i}, {j}) is not an edge")


@dataclass
class MessageTable:
    """Directed messages (src, dst) -> vector over the states of dst.

    Vectors have unit absolute sum; ``log_norms`` holds the log of the
    positive scale stripped from each message (local scale plus everything
    inherited from upstream messages).
    """

    messages: dict = field(default_factory=dict)
    log_norms: dict = field(default_factory=dict)


def brute_marginal(chain: FactorChain, targets) -> np.ndarray:
    """Exact marginal of ``targets`` by summing the materialized joint.

    Output axes follow the order of ``targets``.  Normalized by the signed
    total, so for nonnegative potentials the result sums to 1.
    """
    targets = tuple(int(t) for t in targets)
    if not targets:
        raise ValueError("targets must be nonempty")
    if len(set(targets)) != len(targets):
        raise ValueError(f"targets {targets} contain duplicates")
    n = chain.n_vars
    if any(t < 0 or t >= n for t in targets):
        raise ValueError(f"targets {targets} out of range for {n} variables")
    size = int(np.prod(chain.cards))
    if size > MAX_BRUTE_STATES:
        raise StateSpaceTooLargeError(
            f"joint has {size} states, refusing beyond {MAX_BRUTE_STATES}"
        )

    joint = np.ones(chain.cards)
    for i, phi in enumerate(chain.phis):
        shape = [1] * n
        shape[i] = chain.cards[i]
        joint = joint * phi.reshape(shape)
    for i, j, psi in chain.edges:
        shape = [1] * n
        shape[i] = chain.cards[i]
        shape[j] = chain.cards[j]
        joint = joint * psi.reshape(shape)

    total = joint.sum()
    drop = tuple(k for k in range(n) if k not in targets)
    marg = joint.sum(axis=drop) if drop else joint
    # remaining axes are in ascending variable order; match the given order
    ascending = sorted(targets)
    perm = [ascending.index(t) for t in targets]
    return marg.transpose(perm) / total


def _send(chain: FactorChain, table: MessageTable, src: int, dst: int) -> None:
    prod = chain.phis[src].copy()
    log_scale = 0.0
    for k in chain.neighbors(src):
        if k == dst:
            continue
        prod = prod * table.messages[(k, src)]
        log_scale += table.log_norms[(k, src)]
    vec = chain.psi_between(src, dst).T @ prod
    scale = float(np.abs(vec).sum())
    if scale > 0.0:
        vec = vec / scale
        log_scale += math.log(scale)
    else:
        log_scale = -math.inf
    table.messages[(src, dst)] = vec
    table.log_norms[(src, dst)] = log_scale


def run_bp(chain: FactorChain, root: int = 0) -> MessageTable:
    """Two-pass sum-product: leaves to ``root``, then root back to leaves.

    On a tree two passes converge exactly; no iteration or damping needed.
    """
    order = [root]
    parent = {root: None}
    for v in order:
        for u in chain.neighbors(v):
            if u not in parent:
                parent[u] = v
                order.append(u)

    table = MessageTable()
    for v in reversed(order):
        if parent[v] is not None:
            _send(chain, table, v, parent[v])
    for v in order:
        for u in chain.neighbors(v):
            if parent[u] == v:
                _send(chain, table, v, u)
    return table


def belief_single(chain: FactorChain, table: MessageTable, i: int) -> np.ndarray:
    """b_i proportional to phi_i times all incoming messages, unit sum."""
    b = chain.phis[i].copy()
    for k in chain.neighbors(i):
        b = b * table.messages[(k, i)]
    return b / b.sum()


def belief_pair(chain: FactorChain, table: MessageTable, i: int, j: int) -> np.ndarray:
    """Pairwise belief on edge (i, j), axes ordered (x_i, x_j), unit sum.

    Product of the pair potential, both locals, and the messages flowing
    into i from everywhere but j and into j from everywhere but i.
    """
    if not chain.has_edge(i, j):
        raise NotAnEdgeError(f"({i}, {j}) is not an edge")
    left = chain.phis[i].copy()
    for k in chain.neighbors(i):
        if k != j:
            left = left * table.messages[(k, i)]
    right = chain.phis[j].copy()
    for l in chain.neighbors(j):
        if l != i:
            right = right * table.messages[(l, j)]
    b = chain.psi_between(i, j) * np.outer(left, right)
    return b / b.sum()


def chain_end_marginal(potentials: Sequence[np.ndarray]) -> np.ndarray:
    """Joint quasi-marginal of the two end variables of an open chain.

    ``potentials[k]`` couples chain variable k to k+1 (locals flat).  For
    each state b of the far end, the interior variables are summed out by
    the message recursion m <- psi @ m starting from the b-th column of the
    last potential; messages are renormalized to unit absolute sum at every
    step with the scale carried in log form.  The returned matrix (axes:
    first variable, last variable) is normalized to unit absolute sum.
    """
    mats = [np.asarray(p, dtype=float) for p in potentials]
    if not mats:
        raise ValueError("need at least one potential")
    for k, m in enumerate(mats):
        if m.ndim != 2:
            raise ValueError(f"potential {k} is not a matrix")
        if k + 1 < len(mats) and m.shape[1] != mats[k + 1].shape[0]:
            raise ValueError(
                f"potential {k} has {m.shape[1]} columns but potential {k + 1} "
                f"has {mats[k + 1].shape[0]} rows"
            )

    card_first = mats[0].shape[0]
    card_last = mats[-1].shape[1]
    columns = np.empty((card_first, card_last))
    log_scales = np.empty(card_last)
    for b in range(card_last):
        vec = mats[-1][:, b].copy()
        log_scale = 0.0
        scale = float(np.abs(vec).sum())
        if scale > 0.0:
            vec /= scale
            log_scale += math.log(scale)
        for k in range(len(mats) - 2, -1, -1):
            vec = mats[k] @ vec
            scale = float(np.abs(vec).sum())
            if scale > 0.0:
                vec /= scale
                log_scale += math.log(scale)
        columns[:, b] = vec
        log_scales[b] = log_scale

    # bring all columns to a common scale before the final normalization
    ref = log_scales.max()
    out = columns * np.exp(log_scales - ref)
    return out / np.abs(out).sum()
