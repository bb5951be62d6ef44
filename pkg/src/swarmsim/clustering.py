"""Weighted cluster-head election and cluster membership bookkeeping.

Candidacy scores blend trust, residual energy, and normalized connectivity
with weights that must sum to one.  Election is greedy and global: the
highest-scoring unassigned node becomes a head, its unassigned one-hop
neighbors join it, and the process repeats until everyone has a role.
Nodes with no head in range end up as singleton heads of themselves.

Ties anywhere break toward the lower node id, which keeps elections
deterministic for a fixed input.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Weights:
    """Candidacy weights (trust, energy, connectivity); must sum to 1."""

    trust: float = 0.4
    energy: float = 0.3
    connectivity: float = 0.3

    def __post_init__(self) -> None:
        total = self.trust + self.energy + self.connectivity
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"candidacy weights must sum to 1, got {total}")
        if min(self.trust, self.energy, self.connectivity) < 0:
            raise ValueError("candidacy weights must be non-negative")


def normalized_connectivity(degree: int, swarm_size: int) -> float:
    """One-hop degree over the maximum possible (swarm_size - 1)."""
    if swarm_size <= 1:
        return 0.0
    return degree / (swarm_size - 1)


def candidacy_score(trust: float, energy: float, connectivity: float, weights: Weights) -> float:
    return weights.trust * trust + weights.energy * energy + weights.connectivity * connectivity


def elect_heads(
    scores: dict[int, float],
    neighbors: dict[int, set[int]],
) -> dict[int, list[int]]:
    """Greedy global election; returns head -> members (ascending id order).

    Precondition: `scores` has an entry for every node in `neighbors` and
    the neighbor relation is symmetric.
    """
    unassigned = set(scores)
    clusters: dict[int, list[int]] = {}
    while unassigned:
        # max score, ties toward the lower node id
        head = min(unassigned, key=lambda n: (-scores[n], n))
        unassigned.discard(head)
        members = sorted(n for n in neighbors.get(head, ()) if n in unassigned)
        for m in members:
            unassigned.discard(m)
        clusters[head] = members
    return clusters


@dataclass
class ClusterView:
    """A head's working state for one cluster."""

    head: int
    members: list[int] = field(default_factory=list)
    missed_beacons: dict[int, int] = field(default_factory=dict)
    score_at_election: float = 0.0

    def register(self, member: int) -> None:
        if member != self.head and member not in self.members:
            self.members.append(member)
            self.missed_beacons[member] = 0

    def drop(self, member: int) -> None:
        if member in self.members:
            self.members.remove(member)
        self.missed_beacons.pop(member, None)


def on_beacon_received(view: ClusterView, member: int) -> None:
    if member in view.missed_beacons:
        view.missed_beacons[member] = 0


def on_beacon_missed(view: ClusterView, member: int, loss_limit: int = 3) -> bool:
    """Count a missed beacon; True (and eviction) once the limit is reached."""
    if member not in view.missed_beacons:
        return False
    view.missed_beacons[member] += 1
    if view.missed_beacons[member] >= loss_limit:
        view.drop(member)
        return True
    return False


def maybe_abdicate(score_now: float, score_at_election: float, drop_fraction: float = 0.7) -> bool:
    """A head steps down once its score falls below the election-time fraction."""
    return score_now < drop_fraction * score_at_election


class LinkQuality:
    """Frame-success ratio over the last `window` frames, EWMA-smoothed."""

    def __init__(self, window: int = 20, smoothing: float = 0.1) -> None:
        self.smoothing = smoothing
        self.history: deque[int] = deque(maxlen=window)
        self.value = 1.0

    def record(self, success: bool) -> float:
        self.history.append(1 if success else 0)
        ratio = sum(self.history) / len(self.history)
        self.value = self.smoothing * ratio + (1.0 - self.smoothing) * self.value
        return self.value


@dataclass(frozen=True)
class RelayWeights:
    """Next-hop cost weights over (distrust, link loss, distance)."""

    trust: float = 0.5
    link: float = 0.3
    distance: float = 0.2


@dataclass(slots=True)
class RelayCandidate:
    node_id: int
    trust: float
    link_quality: float
    distance_m: float


def relay_cost(c: RelayCandidate, weights: RelayWeights, diagonal_m: float) -> float:
    norm_d = c.distance_m / diagonal_m if diagonal_m > 0 else 0.0
    return (
        weights.trust * (1.0 - c.trust)
        + weights.link * (1.0 - c.link_quality)
        + weights.distance * norm_d
    )


def next_hop(
    candidates: list[RelayCandidate],
    weights: RelayWeights,
    diagonal_m: float,
) -> int | None:
    """Minimum-cost relay among the candidates; None means no route."""
    if not candidates:
        return None
    best = min(candidates, key=lambda c: (relay_cost(c, weights, diagonal_m), c.node_id))
    return best.node_id
