"""Protocol integration: nodes, clusters, and the per-superframe cycle.

One global event per superframe drives three phases in order:

1. scheduled window -- TDMA uplink slots, member telemetry to the head;
2. contention window -- a single shared channel where heads relay batched
   telemetry toward the swarm leader, orphans send join requests, and
   observers gossip negative trust reports;
3. broadcast window -- head beacons (signed, carrying the next schedule),
   sub-slotted by head id so beacons never collide.

Scheduled windows of different clusters are frequency-separated (one
logical channel per cluster), so slot collisions can only come from
in-cluster misbehavior, which is exactly what the MAC auditor checks.

Election rounds, member handover, watchdog timeouts, and energy accounting
all happen at frame boundaries inside this cycle.  All randomness flows
through four named streams (mobility, fading, backoff, adversary), so an
inert adversary profile reproduces the benign run bit for bit.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import adversary as adv
from .channel import airtime_us, sample_delivery_mask, try_receive
from .clustering import (
    ClusterView,
    candidacy_score,
    elect_heads,
    maybe_abdicate,
    normalized_connectivity,
    on_beacon_missed,
    on_beacon_received,
)
from .energy import EnergyLedger, RadioState
from .engine import Event, SimTime, Simulator, US_PER_S, seconds, us_from_s
from .mac import (
    HEADER_BYTES,
    BackoffState,
    Contender,
    Frame,
    FrameKind,
    Superframe,
    build_superframe,
    run_contention_window,
    slot_capacity,
)
from .metrics import ByteCounters, PacketLedger
from .mobility import Leg, RandomWaypoint, position_at
from .scenario import HALF_ALIVE, Scenario
from .security import SIG_BYTES, NONCE_BYTES, TAG_BYTES, SecuritySuite, make_backend
from .trust import TrustTable

AEAD_TRAILER = NONCE_BYTES + TAG_BYTES
SIGNED_TRAILER = AEAD_TRAILER + SIG_BYTES
BROADCAST = 0xFFFF


class Role(enum.Enum):
    MEMBER = "member"
    HEAD = "head"


@dataclass(slots=True)
class QueuedPacket:
    packet_id: int
    src: int
    dst: int
    payload_bytes: int
    trailer_bytes: int
    enqueued_frame: int


class Node:
    """Mutable per-node protocol state."""

    def __init__(self, node_id: int, world: "World") -> None:
        self.id = node_id
        self.world = world
        self.profile: adv.AdversaryProfile | None = None
        self.energy = EnergyLedger(world.scenario.energy)
        self.trust = TrustTable(world.scenario.trust.params)
        self.backoff = BackoffState.fresh(world.scenario.superframe)
        self.role = Role.MEMBER
        self.head_id: int | None = None
        self.queue: deque[QueuedPacket] = deque()
        self.relay_queue: deque[QueuedPacket] = deque()
        self.pending_watch: dict[int, tuple[int, int]] = {}  # pkt -> (head, deadline frame)
        self.watch_miss: dict[int, int] = {}  # subject -> consecutive unresolved watchdogs
        self.reported: set[int] = set()
        self.pending_reports: deque[int] = deque()
        self.counters = ByteCounters()
        self.seq = 0
        self.missed_beacons = 0
        self.handover_streak = 0
        self.join_target: int | None = None
        self.orphan_scans = 0
        self.slot_len_us: SimTime = 0  # slot owned in the *current* frame's schedule
        self.knows_schedule = True
        self.leg: Leg | None = None

    @property
    def alive(self) -> bool:
        return self.energy.alive

    def next_seq(self) -> int:
        self.seq += 1
        return self.seq

    def malicious_now(self, now: SimTime) -> bool:
        return self.profile is not None and self.profile.active(now)


@dataclass
class Cluster:
    view: ClusterView
    score_at_election: float
    next_election_at: SimTime
    no_depose_until: SimTime = 0
    schedule_current: Superframe | None = None
    schedule_next: Superframe | None = None
    slot_idle: dict[int, int] = field(default_factory=dict)


class World:
    """Builds a swarm from a scenario and runs the superframe cycle."""

    def __init__(
        self,
        scenario: Scenario,
        seed: int | None = None,
        trust_enabled: bool | None = None,
        crypto_backend: str | None = None,
        keep_trace: bool = False,
    ) -> None:
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.trust_on = scenario.trust_enabled if trust_enabled is None else trust_enabled
        backend_name = crypto_backend or scenario.security.backend
        self.security = SecuritySuite(
            backend=make_backend(backend_name),
            delays=scenario.security.delays,
            seed_material=b"swarm-%d" % self.seed,
        )
        self.backend_name = backend_name
        self.sim = Simulator(seed=self.seed)
        self.trace: list[dict] | None = [] if keep_trace else None

        sf = scenario.superframe
        self.sf = sf
        self.data_frame_bytes = HEADER_BYTES + scenario.traffic.payload_bytes + AEAD_TRAILER
        self.data_airtime = airtime_us(scenario.channel, self.data_frame_bytes)
        # beacons are sealed under the swarm group key, so they carry an
        # AEAD trailer; only trust reports pay for a full signature
        self.beacon_bytes = HEADER_BYTES + scenario.security.beacon_payload_bytes + AEAD_TRAILER
        self.beacon_airtime = airtime_us(scenario.channel, self.beacon_bytes)
        self.open_us = scenario.security.delays.aead_us(scenario.traffic.payload_bytes)
        self.beacon_crypt_us = scenario.security.delays.aead_us(
            scenario.security.beacon_payload_bytes
        )

        self.nodes: list[Node] = []
        self.clusters: dict[int, Cluster] = {}
        self.sl_id: int | None = None
        self.head_scores: dict[int, float] = {}
        self.ledger = PacketLedger()
        self.frame_counters = ByteCounters()  # accounting path 1: per transmitted frame
        self.deaths: dict[int, SimTime] = {}
        self.charged_j = 0.0  # world-side double entry for energy conservation
        self.stats = {
            "elections": 0,
            "head_changes": 0,
            "depositions": 0,
            "abdications": 0,
            "evictions": 0,
            "handovers": 0,
            "joins": 0,
            "trust_reports": 0,
            "observations_positive": 0,
            "observations_negative": 0,
            "violations": 0,
        }
        self.timeseries: list[dict] = []
        self._delivered = 0
        self._delay_sum_us = 0
        self.flagged_at: dict[int, SimTime] = {}
        self._positions: np.ndarray = np.zeros((scenario.node_count, 3))
        self._positions_at: SimTime = -1
        # per-frame energy scratch, indexed by node id
        n = scenario.node_count
        self._tx_us = [0] * n
        self._proc_us = [0] * n
        self._stopped_early = False

    # ------------------------------------------------------------------
    # setup

    def setup(self) -> None:
        sc = self.scenario
        mob_rng = self.sim.rng["mobility"]
        self.rwp = RandomWaypoint(sc.area, sc.mobility.speed_ms, sc.mobility.pause_s, mob_rng)
        for nid in range(sc.node_count):
            node = Node(nid, self)
            self.nodes.append(node)
        for node in self.nodes:  # draw order fixed by id
            start = self.rwp.draw_point()
            node.leg = self.rwp.next_leg(start, 0)
            self.sim.queue.schedule(node.leg.pause_until, "waypoint", node.id)
        self._assign_adversaries()
        for node in self.nodes:
            self.security.identity(node.id)  # pre-mission key provisioning
        self._refresh_positions(0)
        self._bootstrap_election()
        self.sim.on("superframe", self._on_superframe)
        self.sim.on("waypoint", self._on_waypoint)
        self.sim.on("sample", self._on_sample)
        self.sim.queue.schedule(0, "superframe", 0)
        self.sim.queue.schedule(0, "sample", None)

    def _assign_adversaries(self) -> None:
        rng = self.sim.rng["adversary"]
        pool = list(range(self.scenario.node_count))
        for group in self.scenario.adversary:
            count = min(group.resolve_count(self.scenario.node_count), len(pool))
            if count <= 0:
                continue
            picks = sorted(rng.choice(len(pool), size=count, replace=False).tolist())
            chosen = [pool[i] for i in picks]
            for nid in chosen:
                self.nodes[nid].profile = group.profile
                pool.remove(nid)

    # ------------------------------------------------------------------
    # geometry helpers

    def _refresh_positions(self, t: SimTime) -> None:
        if self._positions_at == t:
            return
        for node in self.nodes:
            self._positions[node.id] = position_at(node.leg, t)
        self._positions_at = t

    def _distance(self, a: int, b: int) -> float:
        d = self._positions[a] - self._positions[b]
        return float(np.sqrt(d @ d))

    def _deliver(self, packet_id: int, at: SimTime, hops: int) -> None:
        rec = self.ledger.records[packet_id]
        self.ledger.deliver(packet_id, at)
        rec.hops = hops
        self._delivered += 1
        self._delay_sum_us += at - rec.sent_at

    def _alive_ids(self) -> list[int]:
        return [n.id for n in self.nodes if n.alive]

    def _neighbors_within_radius(self, ids: list[int]) -> dict[int, set[int]]:
        radius = self.scenario.clustering.cluster_radius_m
        pos = self._positions[ids]
        diffs = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((diffs**2).sum(axis=2))
        out: dict[int, set[int]] = {nid: set() for nid in ids}
        within = dist <= radius
        for i, nid in enumerate(ids):
            for j in np.nonzero(within[i])[0]:
                if j != i:
                    out[nid].add(ids[int(j)])
        return out

    # ------------------------------------------------------------------
    # elections

    def _advertised_inputs(self, node: Node, degree: int, swarm: int, now: SimTime) -> tuple[float, float]:
        """(energy, connectivity) as the candidate itself advertises them."""
        e = node.energy.normalized()
        c = normalized_connectivity(degree, swarm)
        if node.profile is not None and node.profile.seeks_relay_role(now):
            inflate = node.profile.score_inflation
            e = 1.0
            c = min(1.0, c + inflate)
        return e, c

    def _trust_input(self, candidate: int, voters: list[int]) -> float:
        if not self.trust_on:
            return 0.5
        values = [
            self.nodes[v].trust.expected(candidate) for v in voters if v != candidate
        ]
        if not values:
            return 0.5
        return sum(values) / len(values)

    def _flags(self, observer: Node, subject: int) -> bool:
        """Distrust strong enough to act on.

        Crossing the isolation threshold alone is not enough: one unlucky
        negative already drags a fresh record below it, so refusals and
        votes additionally require repeat evidence.
        """
        return (
            observer.trust.is_isolated(subject)
            and observer.trust.negative_count(subject)
            >= self.scenario.trust.report_min_negatives
        )

    def _vetoed(self, candidate: int, voters: list[int]) -> bool:
        if not self.trust_on:
            return False
        others = [v for v in voters if v != candidate]
        if not others:
            return False
        against = sum(1 for v in others if self._flags(self.nodes[v], candidate))
        return against / len(others) >= self.scenario.trust.quorum

    def _candidate_scores(self, population: list[int], now: SimTime) -> dict[int, float]:
        alive = self._alive_ids()
        graph = self._neighbors_within_radius(alive)
        swarm = len(alive)
        scores: dict[int, float] = {}
        for nid in population:
            node = self.nodes[nid]
            e, c = self._advertised_inputs(node, len(graph.get(nid, ())), swarm, now)
            t = self._trust_input(nid, population)
            scores[nid] = candidacy_score(t, e, c, self.scenario.weights)
        return scores

    def _bootstrap_election(self) -> None:
        now = 0
        alive = self._alive_ids()
        scores = self._candidate_scores(alive, now)
        graph = self._neighbors_within_radius(alive)
        assignment = elect_heads(scores, graph)
        self.stats["elections"] += 1
        for head_id, members in assignment.items():
            self._install_cluster(head_id, members, scores[head_id], now)
        self._reselect_leader()

    def _install_cluster(
        self,
        head_id: int,
        members: list[int],
        score: float,
        now: SimTime,
        election_at: SimTime | None = None,
    ) -> None:
        head = self.nodes[head_id]
        head.role = Role.HEAD
        head.head_id = head_id
        head.missed_beacons = 0
        head.join_target = None
        view = ClusterView(head=head_id, score_at_election=score)
        # spread periodic elections out so clusters never re-elect in the
        # same handful of frames; a synchronized shuffle floods contention
        stagger = (head_id % 37) * self.sf.frame_us
        if election_at is None:
            election_at = now + us_from_s(self.scenario.clustering.reelection_period_s) + stagger
        cluster = Cluster(
            view=view,
            score_at_election=score,
            next_election_at=election_at,
            no_depose_until=now + us_from_s(self.scenario.clustering.deposition_cooldown_s),
        )
        for m in members:
            view.register(m)
            cluster.slot_idle[m] = 0
            member = self.nodes[m]
            member.role = Role.MEMBER
            member.head_id = head_id
            member.missed_beacons = 0
            member.join_target = None
        self.clusters[head_id] = cluster
        self.head_scores[head_id] = score
        self._rebuild_schedule(cluster, self.sf.frame_index(now))
        cluster.schedule_current = cluster.schedule_next
        for slot in cluster.schedule_current.slots:
            self.nodes[slot.owner].slot_len_us = slot.length_us

    def _rebuild_schedule(self, cluster: Cluster, frame_index: int) -> None:
        members = [
            m
            for m in cluster.view.members
            if self.nodes[m].alive and not self._head_excludes(cluster.view.head, m)
        ]
        cluster.schedule_next = build_superframe(self.sf, frame_index + 1, members)

    def _head_excludes(self, head_id: int, member: int) -> bool:
        return self.trust_on and self._flags(self.nodes[head_id], member)

    def _conduct_election(self, cluster: Cluster, now: SimTime, *, forced: bool) -> None:
        population = [
            nid
            for nid in [cluster.view.head, *cluster.view.members]
            if self.nodes[nid].alive
        ]
        if not population:
            self._remove_cluster(cluster.view.head)
            return
        self.stats["elections"] += 1
        scores = self._candidate_scores(population, now)
        eligible = [nid for nid in population if not self._vetoed(nid, population)]
        if not eligible:
            eligible = population
        incumbent = cluster.view.head
        winner = min(eligible, key=lambda n: (-scores[n], n))
        if (
            not forced
            and incumbent in eligible
            and scores[winner] < scores[incumbent] + self.scenario.clustering.election_hysteresis
        ):
            winner = incumbent
        if winner == incumbent:
            cluster.score_at_election = scores[incumbent]
            cluster.view.score_at_election = scores[incumbent]
            self.head_scores[incumbent] = scores[incumbent]
            if not forced:
                cluster.next_election_at = now + us_from_s(
                    self.scenario.clustering.reelection_period_s
                )
            return
        # head change: rebuild the cluster around the winner; a forced
        # election keeps the periodic schedule so a deposition does not
        # push out the next regular round of scrutiny
        self.stats["head_changes"] += 1
        members = [nid for nid in population if nid != winner]
        keep_at = cluster.next_election_at if forced else None
        self._remove_cluster(incumbent)
        self._install_cluster(winner, members, scores[winner], now, election_at=keep_at)
        self._trace(
            {
                "t": now,
                "kind": "election",
                "cluster": winner,
                "old_head": incumbent,
                "forced": forced,
            }
        )

    def _remove_cluster(self, head_id: int) -> None:
        cluster = self.clusters.pop(head_id, None)
        self.head_scores.pop(head_id, None)
        if cluster is None:
            return
        head = self.nodes[head_id]
        if head.role is Role.HEAD:
            head.role = Role.MEMBER
            head.head_id = None

    def _reselect_leader(self) -> None:
        candidates = []
        for head_id in sorted(self.clusters):
            if not self.nodes[head_id].alive:
                continue
            if self.trust_on and self._cluster_flags_head(head_id):
                continue
            candidates.append(head_id)
        if not candidates:
            candidates = [h for h in sorted(self.clusters) if self.nodes[h].alive]
        if not candidates:
            self.sl_id = None
            return
        self.sl_id = min(candidates, key=lambda h: (-self.head_scores.get(h, 0.0), h))

    def _cluster_flags_head(self, head_id: int) -> bool:
        cluster = self.clusters.get(head_id)
        if cluster is None:
            return False
        voters = [m for m in cluster.view.members if self.nodes[m].alive]
        if not voters:
            return False
        against = sum(1 for v in voters if self._flags(self.nodes[v], head_id))
        return against / len(voters) >= self.scenario.trust.quorum

    # ------------------------------------------------------------------
    # event handlers

    def _on_waypoint(self, sim: Simulator, event: Event) -> None:
        node = self.nodes[event.payload]
        if not node.alive:
            return
        node.leg = self.rwp.next_leg(node.leg.target, sim.clock)
        sim.queue.schedule(node.leg.pause_until, "waypoint", node.id)

    def _on_sample(self, sim: Simulator, event: Event) -> None:
        self._record_sample(sim.clock)
        sim.queue.schedule(sim.clock + US_PER_S, "sample", None)

    def _on_superframe(self, sim: Simulator, event: Event) -> None:
        index = event.payload
        t0 = sim.clock
        self._refresh_positions(t0)
        n = self.scenario.node_count
        self._tx_us = [0] * n
        self._proc_us = [0] * n

        self._frame_maintenance(t0)
        self._frame_roles = {node.id: node.role for node in self.nodes if node.alive}
        self._generate_traffic(index, t0)
        self._run_scheduled_window(index, t0)
        self._run_contention(index, t0 + self.sf.contention_offset)
        self._run_broadcast(index, t0 + self.sf.broadcast_offset)
        self._charge_frame_energy(index, t0)
        sim.queue.schedule(t0 + self.sf.frame_us, "superframe", index + 1)

    # ------------------------------------------------------------------
    # frame phases

    def _frame_maintenance(self, now: SimTime) -> None:
        """Elections, depositions, leader reselection, cluster GC."""
        for head_id in sorted(self.clusters):
            cluster = self.clusters.get(head_id)
            if cluster is None:
                continue
            head = self.nodes[head_id]
            if not head.alive:
                # members will notice via missed beacons; tear down directly
                self._remove_cluster(head_id)
                continue
            if (
                self.trust_on
                and cluster.view.members
                and now >= cluster.no_depose_until
                and self._cluster_flags_head(head_id)
            ):
                self.stats["depositions"] += 1
                cluster.no_depose_until = now + us_from_s(
                    self.scenario.clustering.deposition_cooldown_s
                )
                self._conduct_election(cluster, now, forced=True)
                continue
            if cluster.next_election_at <= now:
                self._conduct_election(cluster, now, forced=False)
        # lone heads fold into a neighboring cluster when one is in range
        for head_id in sorted(self.clusters):
            cluster = self.clusters.get(head_id)
            if cluster is None or cluster.view.members:
                continue
            node = self.nodes[head_id]
            if not node.alive:
                continue
            # a deposed-and-exiled head may try to fold back in; the target
            # head rules on the join with its own trust table, not ours
            target = self._best_head_for(node, exclude=head_id)
            if target is not None:
                self._remove_cluster(head_id)
                node.role = Role.MEMBER
                node.head_id = None
                node.join_target = target
        self._reselect_leader()

    def _best_head_for(self, node: Node, exclude: int | None = None) -> int | None:
        radius = self.scenario.clustering.cluster_radius_m
        best = None
        best_d = radius
        for head_id in sorted(self.clusters):
            if head_id == exclude or not self.nodes[head_id].alive:
                continue
            if len(self.clusters[head_id].view.members) >= self.scenario.clustering.max_members:
                continue
            if self.trust_on and self._flags(node, head_id):
                continue
            d = self._distance(node.id, head_id)
            if d <= best_d:
                best, best_d = head_id, d
        return best

    def _generate_traffic(self, index: int, t0: SimTime) -> None:
        period = self.scenario.traffic.period_superframes
        payload = self.scenario.traffic.payload_bytes
        expiry_frames = max(
            1, int(self.scenario.traffic.queue_expiry_s * US_PER_S) // self.sf.frame_us
        )
        sl = self.sl_id
        for node in self.nodes:
            if not node.alive:
                continue
            # expire stale queued packets first
            while node.queue and index - node.queue[0].enqueued_frame > expiry_frames:
                pkt = node.queue.popleft()
                self.ledger.drop(pkt.packet_id, t0, "queue-expired")
            if sl is None or node.id == sl:
                continue
            if index % period != node.id % period:
                continue
            rec = self.ledger.create(node.id, sl, t0, payload)
            node.queue.append(
                QueuedPacket(
                    packet_id=rec.packet_id,
                    src=node.id,
                    dst=sl,
                    payload_bytes=payload,
                    trailer_bytes=AEAD_TRAILER,
                    enqueued_frame=index,
                )
            )
            self._proc_us[node.id] += self.security.delays.aead_us(payload)

    def _run_scheduled_window(self, index: int, t0: SimTime) -> None:
        fading = self.sim.rng["fading"]
        adv_rng = self.sim.rng["adversary"]
        for head_id in sorted(self.clusters):
            cluster = self.clusters[head_id]
            schedule = cluster.schedule_current
            if schedule is None or not schedule.slots:
                continue
            head = self.nodes[head_id]
            head_listening = head.alive and not (
                head.malicious_now(t0) and head.profile.drop_prob >= 1.0
            )
            violator_hits = self._collect_violations(cluster, t0, adv_rng)
            for slot in schedule.slots:
                member = self.nodes[slot.owner]
                if not member.alive or member.head_id != head_id:
                    cluster.slot_idle[slot.owner] = cluster.slot_idle.get(slot.owner, 0) + 1
                    continue
                if not member.knows_schedule:
                    continue  # missed last beacon: stay quiet this frame
                node_slot_start = t0 + slot.offset_us
                capacity = slot_capacity(slot.length_us, self.data_airtime)
                sent_any = False
                for i in range(min(capacity, len(member.queue))):
                    pkt = member.queue.popleft()
                    tx_start = node_slot_start + i * self.data_airtime
                    self._account_tx(
                        member,
                        Frame(
                            kind=FrameKind.DATA,
                            src=member.id,
                            dst=head_id,
                            seq=member.next_seq(),
                            payload_bytes=pkt.payload_bytes,
                            trailer_bytes=pkt.trailer_bytes,
                            packet_ids=(pkt.packet_id,),
                        ),
                        tx_start,
                        "scheduled",
                        channel=head_id,
                        compliant=True,
                    )
                    sent_any = True
                    jammers = violator_hits.get(slot.owner)
                    if jammers:
                        violator = jammers.popleft()
                        self._jam(violator, head, tx_start, head_listening)
                        self.ledger.drop(pkt.packet_id, tx_start, "slot-collision")
                        continue
                    if not head_listening:
                        # head naps through its own TDMA window: silent sink
                        self.ledger.drop(pkt.packet_id, tx_start, "blackhole-dropped")
                        if self.trust_on:
                            member.pending_watch[pkt.packet_id] = (head_id, index + 3)
                        continue
                    sample = try_receive(
                        self.scenario.channel, self._distance(member.id, head_id), fading
                    )
                    if not sample.delivered:
                        # the sender cannot tell a faded uplink from a drop,
                        # so it arms no watchdog (ambiguous, not evidence)
                        self.ledger.drop(pkt.packet_id, tx_start, "uplink-fade")
                        continue
                    rx_end = tx_start + self.data_airtime
                    self._proc_us[head_id] += self.open_us  # hop-by-hop decrypt
                    if head_id == pkt.dst:
                        self._deliver(pkt.packet_id, rx_end + self.open_us, hops=1)
                    else:
                        head.relay_queue.append(pkt)
                        if self.trust_on:
                            # generous deadline: a relay may sit out a couple
                            # of crowded contention windows without that being
                            # evidence of anything
                            member.pending_watch[pkt.packet_id] = (head_id, index + 3)
                if sent_any:
                    cluster.slot_idle[slot.owner] = 0
                else:
                    cluster.slot_idle[slot.owner] = cluster.slot_idle.get(slot.owner, 0) + 1
            # violations aimed at idle or absent victims still hit the air
            for victim, jammers in violator_hits.items():
                slot = schedule.slot_for(victim)
                start = t0 + (slot.offset_us if slot is not None else 0)
                while jammers:
                    self._jam(jammers.popleft(), head, start, head_listening)

    def _collect_violations(
        self, cluster: Cluster, t0: SimTime, adv_rng: np.random.Generator
    ) -> dict[int, deque[int]]:
        """Map victim member id -> queue of violators jamming its slot."""
        hits: dict[int, deque[int]] = {}
        schedule = cluster.schedule_current
        if schedule is None or not schedule.slots:
            return hits
        owners = [s.owner for s in schedule.slots]
        for member_id in cluster.view.members:
            node = self.nodes[member_id]
            if not node.alive or node.profile is None:
                continue
            count = adv.violations_this_frame(node.profile, t0, adv_rng)
            for _ in range(count):
                victim = owners[int(adv_rng.integers(0, len(owners)))]
                hits.setdefault(victim, deque()).append(member_id)
        return hits

    def _jam(self, violator: int, head: Node, at: SimTime, head_listening: bool) -> None:
        """One out-of-slot transmission, pinned to the instant it corrupts."""
        self.stats["violations"] += 1
        self._tx_us[violator] += self.data_airtime
        self._trace(
            {
                "t": at,
                "kind": "tx",
                "window": "scheduled",
                "channel": head.id,
                "src": violator,
                "dur": self.data_airtime,
                "compliant": False,
            }
        )
        if self.trust_on and head_listening:
            self._observe(head, violator, False, at, "mac-violation")

    def _run_contention(self, index: int, t_start: SimTime) -> None:
        backoff_rng = self.sim.rng["backoff"]
        fading = self.sim.rng["fading"]
        adv_rng = self.sim.rng["adversary"]
        contenders: list[Contender] = []
        relay_sources: dict[int, list[QueuedPacket]] = {}

        for node in self.nodes:  # id order
            if not node.alive:
                continue
            # a node demoted with a non-empty relay queue keeps draining it,
            # otherwise the packets (and their watchdogs) would be stranded
            if node.relay_queue or (node.role is Role.HEAD and node.queue):
                batch = self._build_relay_batch(node, index, adv_rng)
                if batch:
                    relay_sources[node.id] = batch
                    # the hop re-seals the whole batch once toward its dst
                    frame = Frame(
                        kind=FrameKind.RELAY,
                        src=node.id,
                        dst=batch[0].dst,
                        seq=node.next_seq(),
                        payload_bytes=sum(p.payload_bytes for p in batch),
                        trailer_bytes=AEAD_TRAILER,
                        packet_ids=tuple(p.packet_id for p in batch),
                    )
                    contenders.append(
                        Contender(node.id, frame, airtime_us(self.scenario.channel, frame.total_bytes), node.backoff)
                    )
            elif node.join_target is not None and self.nodes[node.join_target].alive:
                frame = Frame(
                    kind=FrameKind.JOIN,
                    src=node.id,
                    dst=node.join_target,
                    seq=node.next_seq(),
                    payload_bytes=self.scenario.security.join_payload_bytes,
                    trailer_bytes=AEAD_TRAILER,
                )
                contenders.append(
                    Contender(node.id, frame, airtime_us(self.scenario.channel, frame.total_bytes), node.backoff)
                )
            elif node.pending_reports:
                subject = node.pending_reports[0]
                frame = Frame(
                    kind=FrameKind.TRUST_REPORT,
                    src=node.id,
                    dst=BROADCAST,
                    seq=node.next_seq(),
                    payload_bytes=self.scenario.security.trust_event_bytes,
                    trailer_bytes=SIGNED_TRAILER,
                    packet_ids=(subject,),
                )
                contenders.append(
                    Contender(node.id, frame, airtime_us(self.scenario.channel, frame.total_bytes), node.backoff)
                )
                self._proc_us[node.id] += self.security.delays.sign_us()

        transmissions, done, dropped = run_contention_window(
            self.sf, self.sf.contention_us, contenders, backoff_rng
        )

        for tx in transmissions:
            at = t_start + tx.start_us
            for frame, sender in zip(tx.frames, tx.senders):
                self._account_tx(
                    self.nodes[sender], frame, at, "contention", channel=-1, compliant=True,
                    collided=tx.collided,
                )
            if tx.collided:
                continue
            frame = tx.frames[0]
            sender = tx.senders[0]
            rx_end = at + tx.duration_us
            if frame.kind is FrameKind.RELAY:
                self._deliver_relay(frame, relay_sources[sender], rx_end, fading, index)
            elif frame.kind is FrameKind.JOIN:
                self._deliver_join(frame, rx_end, fading)
            elif frame.kind is FrameKind.TRUST_REPORT:
                self._deliver_report(frame, rx_end, fading)

        for c in dropped:
            node = self.nodes[c.node_id]
            node.backoff = BackoffState.fresh(self.sf)
            if c.frame.kind is FrameKind.RELAY:
                for pkt in relay_sources.get(c.node_id, []):
                    self.ledger.drop(pkt.packet_id, t_start + self.sf.contention_us, "retry-exhausted")
                relay_sources.pop(c.node_id, None)
            # joins and reports simply retry on a fresh backoff next frame

        finished = {c.node_id for c in done}
        for node_id, batch in relay_sources.items():
            if node_id not in finished:
                node = self.nodes[node_id]
                for pkt in reversed(batch):
                    node.relay_queue.appendleft(pkt)  # deferred to the next window

        for c in done:
            node = self.nodes[c.node_id]
            if c.frame.kind is FrameKind.TRUST_REPORT and node.pending_reports:
                node.pending_reports.popleft()
                self.stats["trust_reports"] += 1

        # watchdog timeouts fire at the close of the contention window
        if self.trust_on:
            self._expire_watchdogs(index, t_start + self.sf.contention_us)

    def _build_relay_batch(
        self, head: Node, index: int, adv_rng: np.random.Generator
    ) -> list[QueuedPacket]:
        batch: list[QueuedPacket] = []
        limit = self.scenario.mac.relay_batch_max
        now = self.sf.frame_start(index)
        while head.relay_queue and len(batch) < limit:
            pkt = head.relay_queue[0]
            if adv.should_drop(head.profile, now, adv_rng):
                head.relay_queue.popleft()
                self.ledger.drop(pkt.packet_id, now, "grayhole-dropped")
                continue
            if batch and pkt.dst != batch[0].dst:
                break
            if self._relay_target(head, pkt) is None:
                head.relay_queue.popleft()
                self.ledger.drop(pkt.packet_id, now, "no-route")
                continue
            head.relay_queue.popleft()
            batch.append(pkt)
        # a head's own telemetry rides along when there is room; a head
        # has no uplink slot, so this is its only way out
        while head.role is Role.HEAD and head.queue and len(batch) < limit:
            pkt = head.queue[0]
            if batch and pkt.dst != batch[0].dst:
                break
            if self._relay_target(head, pkt) is None:
                head.queue.popleft()
                self.ledger.drop(pkt.packet_id, now, "no-route")
                continue
            head.queue.popleft()
            batch.append(pkt)
        return batch

    def _relay_target(self, head: Node, pkt: QueuedPacket) -> int | None:
        # distrust of the sink is no reason to discard member data; there
        # is only one sink, so the honest move is to forward regardless
        dst = self.nodes[pkt.dst]
        if not dst.alive:
            return None
        return pkt.dst

    def _deliver_relay(
        self,
        frame: Frame,
        batch: list[QueuedPacket],
        rx_end: SimTime,
        fading: np.random.Generator,
        index: int,
    ) -> None:
        head = self.nodes[frame.src]
        dst = self.nodes[frame.dst]
        if dst.alive:
            sample = try_receive(self.scenario.channel, self._distance(frame.src, frame.dst), fading)
            if sample.delivered:
                open_batch = self.scenario.security.delays.aead_us(
                    sum(p.payload_bytes for p in batch)
                )
                self._proc_us[dst.id] += open_batch
                for pkt in batch:
                    if self.trust_on and self._flags(dst, pkt.src):
                        self.ledger.drop(pkt.packet_id, rx_end, "refused-isolated")
                        continue
                    self._deliver(pkt.packet_id, rx_end + open_batch, hops=2)
            else:
                for pkt in batch:
                    self.ledger.drop(pkt.packet_id, rx_end, "relay-fade")
        else:
            for pkt in batch:
                self.ledger.drop(pkt.packet_id, rx_end, "sink-dead")
        # watchdog: each originator listens for its own packet being relayed
        if not self.trust_on:
            return
        observers: list[int] = []
        for pkt in batch:
            watcher = self.nodes[pkt.src]
            if pkt.src == head.id or not watcher.alive:
                continue
            pending = watcher.pending_watch.get(pkt.packet_id)
            if pending is not None and pending[0] == head.id:
                observers.append(pkt.src)
        observers = list(dict.fromkeys(observers))
        if not observers:
            return
        distances = np.array([self._distance(o, head.id) for o in observers])
        heard = sample_delivery_mask(self.scenario.channel, distances, fading)
        for obs_id, ok in zip(observers, heard):
            obs = self.nodes[obs_id]
            if not ok:
                continue  # could not overhear: inconclusive, no evidence
            for pkt in batch:
                if pkt.src == obs_id and pkt.packet_id in obs.pending_watch:
                    del obs.pending_watch[pkt.packet_id]
                    obs.watch_miss[head.id] = 0
                    self._observe(obs, head.id, True, rx_end, "relay-overheard")

    def _deliver_join(self, frame: Frame, rx_end: SimTime, fading: np.random.Generator) -> None:
        joiner = self.nodes[frame.src]
        head_id = frame.dst
        cluster = self.clusters.get(head_id)
        head = self.nodes[head_id]
        if cluster is None or not head.alive:
            joiner.join_target = None
            return
        sample = try_receive(self.scenario.channel, self._distance(frame.src, head_id), fading)
        if not sample.delivered:
            return  # retry next window
        if self.trust_on and self._flags(head, frame.src):
            joiner.join_target = None  # refused; try someone else next scan
            return
        if len(cluster.view.members) >= self.scenario.clustering.max_members:
            joiner.join_target = None
            return
        old_head = joiner.head_id
        if old_head is not None and old_head in self.clusters and old_head != head_id:
            self.clusters[old_head].view.drop(joiner.id)
            self.stats["handovers"] += 1
        cluster.view.register(joiner.id)
        cluster.slot_idle[joiner.id] = 0
        joiner.head_id = head_id
        joiner.role = Role.MEMBER
        joiner.join_target = None
        joiner.missed_beacons = 0
        joiner.handover_streak = 0
        self.stats["joins"] += 1

    def _deliver_report(self, frame: Frame, rx_end: SimTime, fading: np.random.Generator) -> None:
        if not self.trust_on:
            return
        reporter = frame.src
        subject = frame.packet_ids[0]
        listeners = [
            n.id
            for n in self.nodes
            if n.alive and n.id != reporter and n.id != subject
        ]
        if not listeners:
            return
        distances = np.array([self._distance(l, reporter) for l in listeners])
        heard = sample_delivery_mask(self.scenario.channel, distances, fading)
        weight = self.scenario.trust.indirect_weight
        for lid, ok in zip(listeners, heard):
            if not ok:
                continue
            listener = self.nodes[lid]
            if self._flags(listener, reporter):
                continue  # don't let distrusted nodes bad-mouth others
            self._proc_us[lid] += self.security.delays.verify_us()
            listener.trust.observe(subject, False, rx_end, weight=weight)
            self._proc_us[lid] += self.security.delays.trust_update_us()

    def _expire_watchdogs(self, index: int, now: SimTime) -> None:
        """Unresolved watchdogs become negative evidence, but only in pairs.

        A single miss is indistinguishable from the observer's own fading
        loss, so one unresolved deadline only bumps a streak counter; two
        in a row without an overheard relay in between count as evidence.
        """
        for node in self.nodes:
            if not node.alive or not node.pending_watch:
                continue
            expired = [pid for pid, (_, deadline) in node.pending_watch.items() if deadline <= index]
            for pid in expired:
                head_id, _ = node.pending_watch.pop(pid)
                streak = node.watch_miss.get(head_id, 0) + 1
                if streak >= 2:
                    node.watch_miss[head_id] = 0
                    self._observe(node, head_id, False, now, "relay-timeout")
                else:
                    node.watch_miss[head_id] = streak

    def _observe(self, observer: Node, subject: int, positive: bool, now: SimTime, reason: str) -> None:
        if not self.trust_on:
            return
        observer.trust.observe(subject, positive, now)
        self._proc_us[observer.id] += self.security.delays.trust_update_us()
        if positive:
            self.stats["observations_positive"] += 1
            return
        self.stats["observations_negative"] += 1
        if not self._flags(observer, subject):
            return
        if subject not in observer.reported:
            observer.reported.add(subject)
            observer.pending_reports.append(subject)
        # walking away shares the reporting gate, so the warning to the
        # rest of the swarm is queued before the observer stops watching
        if subject == observer.head_id:
            self._defect(observer, now)

    def _defect(self, member: Node, now: SimTime) -> None:
        old = member.head_id
        if old is not None and old in self.clusters:
            self.clusters[old].view.drop(member.id)
        member.head_id = None
        member.knows_schedule = False
        member.join_target = self._best_head_for(member)
        member.handover_streak = 0
        self.stats["handovers"] += 1

    def _run_broadcast(self, index: int, t_start: SimTime) -> None:
        fading = self.sim.rng["fading"]
        heads = [h for h in sorted(self.clusters) if self.nodes[h].alive]
        if heads:
            sub = self.sf.broadcast_us // len(heads)
            for rank, head_id in enumerate(heads):
                if self.beacon_airtime > sub:
                    break  # broadcast window exhausted; later heads skip this frame
                self._send_beacon(index, head_id, t_start + rank * sub, fading)
        # orphan bookkeeping: scan results materialize as join targets
        for node in self.nodes:
            if not node.alive or node.role is Role.HEAD:
                continue
            if node.head_id is None and node.join_target is None:
                node.orphan_scans += 1
                target = self._best_head_for(node)
                if target is not None:
                    node.join_target = target
                    node.orphan_scans = 0
                elif node.orphan_scans >= 4:
                    # nobody in range: stand up a singleton cluster
                    self._install_cluster(node.id, [], 0.0, t_start)
                    node.orphan_scans = 0
        # advance schedules: what was "next" becomes current for frame k+1
        for head_id in sorted(self.clusters):
            cluster = self.clusters[head_id]
            self._prune_idle_members(cluster)
            self._rebuild_schedule(cluster, index)
            cluster.schedule_current = cluster.schedule_next

    def _send_beacon(self, index: int, head_id: int, at: SimTime, fading: np.random.Generator) -> None:
        head = self.nodes[head_id]
        cluster = self.clusters[head_id]
        # abdication check rides on the beacon build (honest self-assessment)
        if not head.malicious_now(at):
            alive = self._alive_ids()
            deltas = self._positions[alive] - self._positions[head_id]
            in_range = np.sqrt((deltas**2).sum(axis=1)) <= self.scenario.clustering.cluster_radius_m
            degree = int(in_range.sum()) - 1  # minus the head itself
            score_now = candidacy_score(
                0.5,
                head.energy.normalized(),
                normalized_connectivity(degree, len(alive)),
                self.scenario.weights,
            )
            if cluster.view.members and maybe_abdicate(
                score_now,
                cluster.score_at_election,
                self.scenario.clustering.abdication_drop_fraction,
            ):
                self.stats["abdications"] += 1
                self._conduct_election(cluster, at, forced=True)
                if head_id not in self.clusters:
                    return
        frame = Frame(
            kind=FrameKind.BEACON,
            src=head_id,
            dst=BROADCAST,
            seq=head.next_seq(),
            payload_bytes=self.scenario.security.beacon_payload_bytes,
            trailer_bytes=AEAD_TRAILER,
        )
        self._proc_us[head_id] += self.beacon_crypt_us
        self._account_tx(head, frame, at, "broadcast", channel=-2, compliant=True)
        members = [m for m in cluster.view.members if self.nodes[m].alive]
        rx_end = at + self.beacon_airtime
        if members:
            distances = np.array([self._distance(m, head_id) for m in members])
            heard = sample_delivery_mask(self.scenario.channel, distances, fading)
        else:
            heard = []
        loss_limit = self.scenario.clustering.beacon_loss_limit
        for member_id, ok in zip(members, heard):
            member = self.nodes[member_id]
            if ok:
                member.missed_beacons = 0
                member.knows_schedule = True
                on_beacon_received(cluster.view, member_id)
                self._proc_us[member_id] += self.beacon_crypt_us
                self._consider_handover(member, head_id)
            else:
                member.missed_beacons += 1
                member.knows_schedule = False
                if on_beacon_missed(cluster.view, member_id, loss_limit):
                    self.stats["evictions"] += 1
                    member.head_id = None
                    member.missed_beacons = 0
                    member.join_target = None

    def _consider_handover(self, member: Node, head_id: int) -> None:
        """Geometry-driven re-affiliation when another head is clearly closer."""
        if member.join_target is not None:
            return
        d_own = self._distance(member.id, head_id)
        if d_own <= self.scenario.clustering.cluster_radius_m:
            member.handover_streak = 0
            return
        best = self._best_head_for(member, exclude=head_id)
        if best is None:
            member.handover_streak = 0
            return
        if self._distance(member.id, best) < d_own - self.scenario.clustering.handover_margin_m:
            member.handover_streak += 1
            if member.handover_streak >= 3:
                member.join_target = best
                member.handover_streak = 0
        else:
            member.handover_streak = 0

    def _prune_idle_members(self, cluster: Cluster) -> None:
        # a slot unused for ~4 traffic periods means the member is gone
        limit = 4 * self.scenario.traffic.period_superframes
        for member_id in list(cluster.view.members):
            node = self.nodes[member_id]
            if not node.alive or node.head_id != cluster.view.head:
                cluster.view.drop(member_id)
                cluster.slot_idle.pop(member_id, None)
                continue
            if cluster.slot_idle.get(member_id, 0) > limit:
                cluster.view.drop(member_id)
                cluster.slot_idle.pop(member_id, None)
                node.head_id = None
                node.join_target = None
                self.stats["evictions"] += 1

    # ------------------------------------------------------------------
    # accounting

    def _account_tx(
        self,
        sender: Node,
        frame: Frame,
        at: SimTime,
        window: str,
        channel: int,
        compliant: bool,
        collided: bool = False,
    ) -> None:
        airtime = airtime_us(self.scenario.channel, frame.total_bytes)
        self._tx_us[sender.id] += airtime
        sender.counters.add_frame(frame)
        self.frame_counters.add_frame(frame)
        self._trace(
            {
                "t": at,
                "kind": "tx",
                "window": window,
                "channel": channel,
                "src": sender.id,
                "dst": frame.dst,
                "frame": frame.kind.value,
                "bytes": frame.total_bytes,
                "dur": airtime,
                "compliant": compliant,
                "collided": collided,
            }
        )

    def _charge_frame_energy(self, index: int, t0: SimTime) -> None:
        sf = self.sf
        for node in self.nodes:
            if node.energy.dead_at is not None:
                continue
            role = self._frame_roles.get(node.id)
            if role is None:
                continue
            tx = self._tx_us[node.id]
            proc = self._proc_us[node.id]
            if role is Role.HEAD:
                if node.malicious_now(t0) and node.profile.drop_prob >= 1.0:
                    awake = sf.contention_us + sf.broadcast_us  # naps through TDMA
                else:
                    awake = sf.frame_us
                rx = max(0, awake - tx)
                sleep = sf.frame_us - awake
            else:
                slot = node.slot_len_us if node.knows_schedule else 0
                awake = sf.contention_us + sf.broadcast_us + slot + proc
                awake = min(awake, sf.frame_us)
                rx = max(0, awake - tx)
                sleep = sf.frame_us - awake
            charged = 0.0
            if tx:
                charged += node.energy.charge(RadioState.TX, tx, t0)
            if rx:
                charged += node.energy.charge(RadioState.RX, rx, t0)
            if sleep:
                charged += node.energy.charge(RadioState.SLEEP, sleep, t0)
            self.charged_j += charged
            if not node.energy.alive and node.id not in self.deaths:
                self.deaths[node.id] = node.energy.dead_at
                self._trace({"t": node.energy.dead_at, "kind": "death", "node": node.id})
        # refresh members' view of their own slot for the next frame
        for node in self.nodes:
            node.slot_len_us = 0
        for cluster in self.clusters.values():
            schedule = cluster.schedule_current
            if schedule is None:
                continue
            for slot in schedule.slots:
                self.nodes[slot.owner].slot_len_us = slot.length_us

    def _trace(self, record: dict) -> None:
        if self.trace is not None:
            self.trace.append(record)

    # ------------------------------------------------------------------
    # sampling and reporting

    def _flag_sets(self) -> tuple[set[int], set[int]]:
        """(flagged malicious, flagged benign) under the peer-quorum rule."""
        flagged_mal: set[int] = set()
        flagged_ben: set[int] = set()
        if not self.trust_on:
            return flagged_mal, flagged_ben
        quorum = self.scenario.trust.quorum
        for node in self.nodes:
            peers = self._peers_of(node)
            if not peers:
                continue
            against = sum(1 for p in peers if self._flags(self.nodes[p], node.id))
            if against / len(peers) >= quorum:
                if node.profile is not None and not node.profile.inert:
                    flagged_mal.add(node.id)
                else:
                    flagged_ben.add(node.id)
        return flagged_mal, flagged_ben

    def _peers_of(self, node: Node) -> list[int]:
        if node.role is Role.HEAD:
            cluster = self.clusters.get(node.id)
            if cluster is not None and cluster.view.members:
                return [m for m in cluster.view.members if self.nodes[m].alive]
        elif node.head_id is not None and node.head_id in self.clusters:
            view = self.clusters[node.head_id].view
            return [
                p
                for p in [view.head, *view.members]
                if p != node.id and self.nodes[p].alive
            ]
        # orphans and singletons answer to whoever is in radio locality
        radius = self.scenario.clustering.cluster_radius_m
        alive = self._alive_ids()
        deltas = self._positions[alive] - self._positions[node.id]
        near = np.sqrt((deltas**2).sum(axis=1)) <= radius
        return [nid for nid, ok in zip(alive, near) if ok and nid != node.id]

    def detection_status(self, node_id: int) -> dict:
        """Whether the swarm has ever reached quorum against `node_id`."""
        at = self.flagged_at.get(node_id)
        return {"flagged": at is not None, "flagged_at": at}

    def _record_sample(self, now: SimTime) -> None:
        self._refresh_positions(now)
        flagged_mal, flagged_ben = self._flag_sets()
        # first-flag times are sticky: a node that later regains peer trust
        # still counts as having been flagged at that moment
        for nid in flagged_mal | flagged_ben:
            self.flagged_at.setdefault(nid, now)
        delivered = self._delivered
        generated = self.ledger.generated
        alive = sum(1 for n in self.nodes if n.alive)
        residuals = [n.energy.residual_j for n in self.nodes if n.alive]
        self.timeseries.append(
            {
                "t_s": round(seconds(now), 3),
                "alive": alive,
                "clusters": len(self.clusters),
                "generated": generated,
                "delivered": delivered,
                "pdr": round(delivered / generated, 6) if generated else 0.0,
                "mean_delay_ms": round(self._delay_sum_us / delivered / 1000.0, 6)
                if delivered
                else 0.0,
                "flagged_malicious": sum(
                    1
                    for nid in self.flagged_at
                    if self.nodes[nid].profile is not None
                    and not self.nodes[nid].profile.inert
                ),
                "flagged_benign": sum(
                    1
                    for nid in self.flagged_at
                    if self.nodes[nid].profile is None or self.nodes[nid].profile.inert
                ),
                "mean_residual_j": round(sum(residuals) / len(residuals), 6) if residuals else 0.0,
            }
        )

    def run(self) -> dict:
        from .metrics import (
            delay_stats,
            detection_rate,
            false_positive_rate,
            lifetime_marks,
            overhead_fraction,
            pdr,
        )

        self.setup()
        duration = self.scenario.duration_us
        stop_check = None
        if self.scenario.stop_rule == HALF_ALIVE:
            half = self.scenario.node_count // 2

            def stop_check() -> bool:
                alive = sum(1 for n in self.nodes if n.alive)
                if alive <= half:
                    self._stopped_early = True
                    return True
                return False

        self.sim.run_until(duration, stop_check)
        self._record_sample(self.sim.clock)

        node_counters = ByteCounters()
        for node in self.nodes:
            node_counters.merge(node.counters)
        malicious = {
            n.id for n in self.nodes if n.profile is not None and not n.profile.inert
        }
        all_ids = {n.id for n in self.nodes}
        horizon = us_from_s(
            self.scenario.duration_s * self.scenario.detection.horizon_fraction
        )
        by_horizon = {nid for nid, at in self.flagged_at.items() if at <= horizon}
        flagged_mal = by_horizon & malicious
        flagged_ben = by_horizon - malicious
        final_mal = set(self.flagged_at) & malicious
        ledger_consumed = sum(n.energy.total_consumed_j for n in self.nodes)
        ledger_residual = sum(n.energy.residual_j for n in self.nodes)
        initial_total = self.scenario.energy.initial_j * self.scenario.node_count

        report = {
            "scenario": self.scenario.name,
            "seed": self.seed,
            "config_digest": self.scenario.digest(),
            "trust_enabled": self.trust_on,
            "crypto_backend": self.backend_name,
            "duration_s": round(seconds(self.sim.clock), 6),
            "stopped_early": self._stopped_early,
            "packets": {
                "generated": self.ledger.generated,
                "delivered": self.ledger.delivered,
                "dropped": self.ledger.dropped,
                "in_flight": self.ledger.in_flight,
                "conservation_ok": self.ledger.conservation_ok(),
                "drop_reasons": self.ledger.drop_reasons(),
            },
            "pdr": round(pdr(self.ledger), 6),
            "delay": delay_stats(self.ledger.delays_us()),
            "overhead": {
                "frame_accounting": self.frame_counters.as_dict(),
                "node_accounting": node_counters.as_dict(),
                "accounting_match": self.frame_counters.as_dict() == node_counters.as_dict(),
                "fraction": round(
                    overhead_fraction(
                        self.frame_counters.control_bytes,
                        self.frame_counters.security_bytes,
                        self.frame_counters.total_bytes,
                    ),
                    6,
                ),
            },
            "detection": {
                "malicious": sorted(malicious),
                "flagged_at_horizon": sorted(by_horizon),
                "flagged_at_s": {
                    nid: round(seconds(at), 3)
                    for nid, at in sorted(self.flagged_at.items())
                },
                "detection_rate": detection_rate(flagged_mal, malicious),
                "false_positive_rate": round(
                    false_positive_rate(by_horizon, malicious, all_ids), 6
                ),
                "detection_rate_final": detection_rate(final_mal, malicious),
                "horizon_s": self.scenario.duration_s * self.scenario.detection.horizon_fraction,
            },
            "energy": {
                "initial_total_j": round(initial_total, 9),
                "consumed_total_j": round(ledger_consumed, 9),
                "residual_total_j": round(ledger_residual, 9),
                "double_entry_error_j": abs(self.charged_j - ledger_consumed),
                "per_state_j": {
                    state.value: round(
                        sum(n.energy.consumed_j[state.value] for n in self.nodes), 9
                    )
                    for state in RadioState
                },
            },
            "lifetime": {
                **lifetime_marks(self.deaths, self.scenario.node_count),
                "alive_at_end": sum(1 for n in self.nodes if n.alive),
            },
            "protocol": dict(sorted(self.stats.items())),
            "timeseries": self.timeseries,
        }
        return report
