"""Scenario schema: JSON loading, strict validation, and canonical digests.

A scenario file only needs to state what differs from the defaults; the
parser materializes everything else.  Validation is strict: unknown keys
and type mismatches are collected with their full key paths and reported
together, so a typo like ``"trust.delta_betas"`` fails loudly instead of
silently running with defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .adversary import BLACKHOLE, AdversaryProfile
from .channel import ChannelParams
from .clustering import RelayWeights, Weights
from .energy import EnergyParams
from .engine import us_from_s
from .mac import SuperframeConfig
from .mobility import Box
from .security import MODELED, REAL, ProcessingDelays
from .trust import DECAY_THEN_INCREMENT, INCREMENT_THEN_DECAY, TrustParams

FIXED_HORIZON = "fixed-horizon"
HALF_ALIVE = "half-alive"


class ScenarioError(ValueError):
    """All validation problems for one file, each tagged with its key path."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid scenario:\n  " + "\n  ".join(problems))


@dataclass(frozen=True)
class MobilityConfig:
    speed_ms: tuple[float, float] = (5.0, 15.0)
    pause_s: tuple[float, float] = (0.0, 2.0)


@dataclass(frozen=True)
class ClusteringConfig:
    cluster_radius_m: float = 250.0
    beacon_loss_limit: int = 3
    abdication_drop_fraction: float = 0.7
    reelection_period_s: float = 30.0
    election_hysteresis: float = 0.01
    handover_margin_m: float = 50.0
    max_members: int = 40
    deposition_cooldown_s: float = 1.0


@dataclass(frozen=True)
class TrafficConfig:
    payload_bytes: int = 256
    period_superframes: int = 3  # one packet per node per this many frames
    queue_expiry_s: float = 2.0


@dataclass(frozen=True)
class MacPolicyConfig:
    relay_batch_max: int = 16


@dataclass(frozen=True)
class TrustProtocolConfig:
    params: TrustParams = field(default_factory=TrustParams)
    indirect_weight: float = 0.25  # evidence weight of second-hand reports
    report_min_negatives: int = 2  # direct negatives needed before gossiping
    quorum: float = 0.5


@dataclass(frozen=True)
class SecurityConfig:
    backend: str = MODELED
    delays: ProcessingDelays = field(default_factory=ProcessingDelays)
    beacon_payload_bytes: int = 43  # 52-byte beacon minus the 9-byte header
    trust_event_bytes: int = 16
    join_payload_bytes: int = 16


@dataclass(frozen=True)
class DetectionConfig:
    horizon_fraction: float = 0.5


@dataclass(frozen=True)
class AdversaryGroup:
    profile: AdversaryProfile
    fraction: float = 0.0
    count: int | None = None

    def resolve_count(self, swarm_size: int) -> int:
        if self.count is not None:
            return self.count
        return int(round(self.fraction * swarm_size))


@dataclass
class Scenario:
    name: str = "unnamed"
    node_count: int = 100
    area: Box = field(default_factory=lambda: Box(400.0, 400.0, 1000.0))
    duration_s: float = 120.0
    seed: int = 1
    stop_rule: str = FIXED_HORIZON
    trust_enabled: bool = True
    weights: Weights = field(default_factory=Weights)
    relay_weights: RelayWeights = field(default_factory=RelayWeights)
    trust: TrustProtocolConfig = field(default_factory=TrustProtocolConfig)
    superframe: SuperframeConfig = field(default_factory=SuperframeConfig)
    mac: MacPolicyConfig = field(default_factory=MacPolicyConfig)
    channel: ChannelParams = field(default_factory=ChannelParams)
    energy: EnergyParams = field(default_factory=EnergyParams)
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    security: SecurityConfig = field(default_factory=SecurityConfig)
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    adversary: list[AdversaryGroup] = field(default_factory=list)

    @property
    def duration_us(self) -> int:
        return us_from_s(self.duration_s)

    def effective_dict(self) -> dict:
        """Fully materialized configuration, defaults included."""
        return {
            "name": self.name,
            "node_count": self.node_count,
            "area_m": [self.area.x, self.area.y, self.area.z],
            "duration_s": self.duration_s,
            "seed": self.seed,
            "stop_rule": self.stop_rule,
            "trust_enabled": self.trust_enabled,
            "weights": {
                "trust": self.weights.trust,
                "energy": self.weights.energy,
                "connectivity": self.weights.connectivity,
            },
            "relay_weights": {
                "trust": self.relay_weights.trust,
                "link": self.relay_weights.link,
                "distance": self.relay_weights.distance,
            },
            "trust": {
                "delta_alpha": self.trust.params.delta_alpha,
                "delta_beta": self.trust.params.delta_beta,
                "decay_lambda_per_s": self.trust.params.decay_lambda_per_s,
                "isolation_threshold": self.trust.params.isolation_threshold,
                "prior": list(self.trust.params.prior),
                "decay_order": self.trust.params.decay_order,
                "indirect_weight": self.trust.indirect_weight,
                "report_min_negatives": self.trust.report_min_negatives,
                "quorum": self.trust.quorum,
            },
            "superframe": {
                "scheduled_ms": self.superframe.scheduled_us / 1000,
                "contention_ms": self.superframe.contention_us / 1000,
                "broadcast_ms": self.superframe.broadcast_us / 1000,
                "guard_us": self.superframe.guard_us,
                "backoff_slot_us": self.superframe.backoff_slot_us,
                "cw_min": self.superframe.cw_min,
                "cw_max": self.superframe.cw_max,
                "retry_limit": self.superframe.retry_limit,
            },
            "mac": {"relay_batch_max": self.mac.relay_batch_max},
            "channel": {
                "tx_power_dbm": self.channel.tx_power_dbm,
                "sensitivity_dbm": self.channel.sensitivity_dbm,
                "ref_loss_db": self.channel.ref_loss_db,
                "path_exponent": self.channel.path_exponent,
                "bitrate_bps": self.channel.bitrate_bps,
                "nakagami_m": [[b, m] for b, m in self.channel.nakagami_m],
            },
            "energy": {
                "currents_a": dict(self.energy.currents_a),
                "voltage_v": self.energy.voltage_v,
                "initial_j": self.energy.initial_j,
            },
            "mobility": {
                "speed_ms": list(self.mobility.speed_ms),
                "pause_s": list(self.mobility.pause_s),
            },
            "clustering": {
                "cluster_radius_m": self.clustering.cluster_radius_m,
                "beacon_loss_limit": self.clustering.beacon_loss_limit,
                "abdication_drop_fraction": self.clustering.abdication_drop_fraction,
                "reelection_period_s": self.clustering.reelection_period_s,
                "election_hysteresis": self.clustering.election_hysteresis,
                "handover_margin_m": self.clustering.handover_margin_m,
                "max_members": self.clustering.max_members,
                "deposition_cooldown_s": self.clustering.deposition_cooldown_s,
            },
            "traffic": {
                "payload_bytes": self.traffic.payload_bytes,
                "period_superframes": self.traffic.period_superframes,
                "queue_expiry_s": self.traffic.queue_expiry_s,
            },
            "security": {
                "backend": self.security.backend,
                "aead_ms_per_256b": self.security.delays.aead_ms_per_256b,
                "verify_ms": self.security.delays.verify_ms,
                "sign_ms": self.security.delays.sign_ms,
                "trust_update_ms": self.security.delays.trust_update_ms,
                "beacon_payload_bytes": self.security.beacon_payload_bytes,
                "trust_event_bytes": self.security.trust_event_bytes,
                "join_payload_bytes": self.security.join_payload_bytes,
            },
            "detection": {"horizon_fraction": self.detection.horizon_fraction},
            "adversary": [
                {
                    "kind": g.profile.kind,
                    "fraction": g.fraction,
                    "count": g.count,
                    "drop_prob": g.profile.drop_prob,
                    "violation_rate": g.profile.violation_rate,
                    "active_from_s": g.profile.active_from_us / 1_000_000,
                    "score_inflation": g.profile.score_inflation,
                }
                for g in self.adversary
            ],
        }

    def digest(self) -> str:
        canon = json.dumps(self.effective_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


# ---------------------------------------------------------------------------
# strict dict -> Scenario parsing


class _Section:
    """Cursor over one dict level that records problems with full key paths."""

    def __init__(self, data: dict, path: str, problems: list[str]):
        self.data = data
        self.path = path
        self.problems = problems
        self.seen: set[str] = set()

    def _tag(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def take(self, key: str, kind, default):
        self.seen.add(key)
        if key not in self.data:
            return default
        value = self.data[key]
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                self.problems.append(f"{self._tag(key)}: expected number, got {value!r}")
                return default
            return float(value)
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                self.problems.append(f"{self._tag(key)}: expected integer, got {value!r}")
                return default
            return value
        if kind is bool:
            if not isinstance(value, bool):
                self.problems.append(f"{self._tag(key)}: expected boolean, got {value!r}")
                return default
            return value
        if kind is str:
            if not isinstance(value, str):
                self.problems.append(f"{self._tag(key)}: expected string, got {value!r}")
                return default
            return value
        if kind is list:
            if not isinstance(value, list):
                self.problems.append(f"{self._tag(key)}: expected list, got {value!r}")
                return default
            return value
        raise TypeError(f"unsupported kind {kind}")

    def sub(self, key: str) -> "_Section":
        self.seen.add(key)
        value = self.data.get(key, {})
        if not isinstance(value, dict):
            self.problems.append(f"{self._tag(key)}: expected object, got {value!r}")
            value = {}
        return _Section(value, self._tag(key), self.problems)

    def pair(self, key: str, default: tuple[float, float]) -> tuple[float, float]:
        raw = self.take(key, list, None)
        if raw is None:
            return default
        if len(raw) != 2 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
            self.problems.append(f"{self._tag(key)}: expected [low, high] numbers, got {raw!r}")
            return default
        return float(raw[0]), float(raw[1])

    def finish(self) -> None:
        for key in self.data:
            if key not in self.seen:
                self.problems.append(f"{self._tag(key)}: unknown key")


def _guarded(problems: list[str], path: str, builder, default):
    try:
        return builder()
    except ValueError as exc:
        problems.append(f"{path}: {exc}")
        return default


def parse_scenario(data: dict, name: str = "unnamed") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError(["top level: expected a JSON object"])
    problems: list[str] = []
    root = _Section(data, "", problems)

    name = root.take("name", str, name)
    node_count = root.take("node_count", int, 100)
    if node_count < 1:
        problems.append("node_count: must be at least 1")
    area_raw = root.take("area_m", list, [400.0, 400.0, 1000.0])
    if len(area_raw) != 3 or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0 for v in area_raw
    ):
        problems.append(f"area_m: expected three non-negative numbers, got {area_raw!r}")
        area_raw = [400.0, 400.0, 1000.0]
    duration_s = root.take("duration_s", float, 120.0)
    if duration_s <= 0:
        problems.append("duration_s: must be positive")
    seed = root.take("seed", int, 1)
    stop_rule = root.take("stop_rule", str, FIXED_HORIZON)
    if stop_rule not in (FIXED_HORIZON, HALF_ALIVE):
        problems.append(f"stop_rule: expected {FIXED_HORIZON!r} or {HALF_ALIVE!r}, got {stop_rule!r}")
        stop_rule = FIXED_HORIZON
    trust_enabled = root.take("trust_enabled", bool, True)

    w = root.sub("weights")
    weights = _guarded(
        problems,
        "weights",
        lambda: Weights(
            trust=w.take("trust", float, 0.4),
            energy=w.take("energy", float, 0.3),
            connectivity=w.take("connectivity", float, 0.3),
        ),
        Weights(),
    )
    w.finish()

    rw = root.sub("relay_weights")
    relay_weights = RelayWeights(
        trust=rw.take("trust", float, 0.5),
        link=rw.take("link", float, 0.3),
        distance=rw.take("distance", float, 0.2),
    )
    rw.finish()

    tr = root.sub("trust")
    prior_raw = tr.pair("prior", (1.0, 1.0))
    decay_order = tr.take("decay_order", str, INCREMENT_THEN_DECAY)
    trust_params = _guarded(
        problems,
        "trust",
        lambda: TrustParams(
            delta_alpha=tr.take("delta_alpha", float, 1.0),
            delta_beta=tr.take("delta_beta", float, 2.0),
            decay_lambda_per_s=tr.take("decay_lambda_per_s", float, 0.01),
            isolation_threshold=tr.take("isolation_threshold", float, 0.4),
            prior=prior_raw,
            decay_order=decay_order,
        ),
        TrustParams(),
    )
    trust_cfg = TrustProtocolConfig(
        params=trust_params,
        indirect_weight=tr.take("indirect_weight", float, 0.25),
        report_min_negatives=tr.take("report_min_negatives", int, 2),
        quorum=tr.take("quorum", float, 0.5),
    )
    tr.finish()

    sf = root.sub("superframe")
    superframe = SuperframeConfig(
        scheduled_us=int(round(sf.take("scheduled_ms", float, 70.0) * 1000)),
        contention_us=int(round(sf.take("contention_ms", float, 20.0) * 1000)),
        broadcast_us=int(round(sf.take("broadcast_ms", float, 10.0) * 1000)),
        guard_us=sf.take("guard_us", int, 0),
        backoff_slot_us=sf.take("backoff_slot_us", int, 100),
        cw_min=sf.take("cw_min", int, 32),
        cw_max=sf.take("cw_max", int, 256),
        retry_limit=sf.take("retry_limit", int, 6),
    )
    if superframe.frame_us <= 0:
        problems.append("superframe: windows must sum to a positive duration")
    sf.finish()

    mp = root.sub("mac")
    mac_cfg = MacPolicyConfig(relay_batch_max=mp.take("relay_batch_max", int, 16))
    mp.finish()

    ch = root.sub("channel")
    nakagami_raw = ch.take("nakagami_m", list, None)
    nakagami: tuple[tuple[float | None, float], ...]
    if nakagami_raw is None:
        nakagami = ((80.0, 1.5), (None, 0.75))
    else:
        nakagami = ()
        ok = True
        for i, entry in enumerate(nakagami_raw):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not (entry[0] is None or isinstance(entry[0], (int, float)))
                or not isinstance(entry[1], (int, float))
                or entry[1] <= 0
            ):
                problems.append(f"channel.nakagami_m[{i}]: expected [bound-or-null, shape>0]")
                ok = False
                break
            nakagami += ((None if entry[0] is None else float(entry[0]), float(entry[1])),)
        if not ok or not nakagami or nakagami[-1][0] is not None:
            if ok and nakagami and nakagami[-1][0] is not None:
                problems.append("channel.nakagami_m: last entry must have a null bound")
            nakagami = ((80.0, 1.5), (None, 0.75))
    bitrate = ch.take("bitrate_bps", int, 8_000_000)
    if bitrate <= 0:
        problems.append("channel.bitrate_bps: must be positive")
        bitrate = 8_000_000
    channel = ChannelParams(
        tx_power_dbm=ch.take("tx_power_dbm", float, 23.0),
        sensitivity_dbm=ch.take("sensitivity_dbm", float, -95.0),
        ref_loss_db=ch.take("ref_loss_db", float, 40.0),
        path_exponent=ch.take("path_exponent", float, 2.0),
        bitrate_bps=bitrate,
        nakagami_m=nakagami,
    )
    ch.finish()

    en = root.sub("energy")
    cur = en.sub("currents_a")
    currents = {
        "tx": cur.take("tx", float, 0.0174),
        "rx": cur.take("rx", float, 0.0197),
        "idle": cur.take("idle", float, 0.000273),
        "sleep": cur.take("sleep", float, 0.000033),
    }
    cur.finish()
    if any(v < 0 for v in currents.values()):
        problems.append("energy.currents_a: currents must be non-negative")
    initial_j = en.take("initial_j", float, 100.0)
    if initial_j <= 0:
        problems.append("energy.initial_j: must be positive")
    energy = EnergyParams(
        currents_a=currents,
        voltage_v=en.take("voltage_v", float, 3.0),
        initial_j=initial_j,
    )
    en.finish()

    mo = root.sub("mobility")
    speed = mo.pair("speed_ms", (5.0, 15.0))
    pause = mo.pair("pause_s", (0.0, 2.0))
    if speed[0] <= 0 or speed[1] < speed[0]:
        problems.append(f"mobility.speed_ms: need 0 < low <= high, got {list(speed)}")
        speed = (5.0, 15.0)
    if pause[0] < 0 or pause[1] < pause[0]:
        problems.append(f"mobility.pause_s: need 0 <= low <= high, got {list(pause)}")
        pause = (0.0, 2.0)
    mobility = MobilityConfig(speed_ms=speed, pause_s=pause)
    mo.finish()

    cl = root.sub("clustering")
    clustering = ClusteringConfig(
        cluster_radius_m=cl.take("cluster_radius_m", float, 250.0),
        beacon_loss_limit=cl.take("beacon_loss_limit", int, 3),
        abdication_drop_fraction=cl.take("abdication_drop_fraction", float, 0.7),
        reelection_period_s=cl.take("reelection_period_s", float, 30.0),
        election_hysteresis=cl.take("election_hysteresis", float, 0.01),
        handover_margin_m=cl.take("handover_margin_m", float, 50.0),
        max_members=cl.take("max_members", int, 40),
        deposition_cooldown_s=cl.take("deposition_cooldown_s", float, 1.0),
    )
    cl.finish()

    tf = root.sub("traffic")
    traffic = TrafficConfig(
        payload_bytes=tf.take("payload_bytes", int, 256),
        period_superframes=tf.take("period_superframes", int, 3),
        queue_expiry_s=tf.take("queue_expiry_s", float, 2.0),
    )
    if traffic.payload_bytes <= 0:
        problems.append("traffic.payload_bytes: must be positive")
    if traffic.period_superframes < 1:
        problems.append("traffic.period_superframes: must be at least 1")
    tf.finish()

    se = root.sub("security")
    backend = se.take("backend", str, MODELED)
    if backend not in (MODELED, REAL):
        problems.append(f"security.backend: expected {MODELED!r} or {REAL!r}, got {backend!r}")
        backend = MODELED
    security = SecurityConfig(
        backend=backend,
        delays=ProcessingDelays(
            aead_ms_per_256b=se.take("aead_ms_per_256b", float, 1.6),
            verify_ms=se.take("verify_ms", float, 3.5),
            sign_ms=se.take("sign_ms", float, 3.5),
            trust_update_ms=se.take("trust_update_ms", float, 0.08),
        ),
        beacon_payload_bytes=se.take("beacon_payload_bytes", int, 43),
        trust_event_bytes=se.take("trust_event_bytes", int, 16),
        join_payload_bytes=se.take("join_payload_bytes", int, 16),
    )
    se.finish()

    de = root.sub("detection")
    detection = DetectionConfig(horizon_fraction=de.take("horizon_fraction", float, 0.5))
    if not 0.0 < detection.horizon_fraction <= 1.0:
        problems.append("detection.horizon_fraction: must be in (0, 1]")
        detection = DetectionConfig()
    de.finish()

    groups: list[AdversaryGroup] = []
    root.seen.add("adversary")
    adv_raw = data.get("adversary", [])
    if not isinstance(adv_raw, list):
        problems.append("adversary: expected a list of profiles")
        adv_raw = []
    for i, entry in enumerate(adv_raw):
        if not isinstance(entry, dict):
            problems.append(f"adversary[{i}]: expected object")
            continue
        sec = _Section(entry, f"adversary[{i}]", problems)
        kind = sec.take("kind", str, "")
        fraction = sec.take("fraction", float, 0.0)
        count_val = sec.take("count", int, -1)
        profile = _guarded(
            problems,
            f"adversary[{i}]",
            lambda k=kind, s=sec: AdversaryProfile(
                kind=k,
                drop_prob=s.take("drop_prob", float, 1.0 if k == BLACKHOLE else 0.0),
                violation_rate=s.take("violation_rate", float, 0.0),
                active_from_us=us_from_s(s.take("active_from_s", float, 0.0)),
                score_inflation=s.take("score_inflation", float, 0.15),
            ),
            None,
        )
        sec.finish()
        if profile is None:
            continue
        if not 0.0 <= fraction <= 1.0:
            problems.append(f"adversary[{i}].fraction: must be in [0, 1]")
            fraction = 0.0
        if "count" in entry and count_val < 0:
            problems.append(f"adversary[{i}].count: must be non-negative")
        groups.append(
            AdversaryGroup(
                profile=profile,
                fraction=fraction,
                count=None if count_val < 0 else count_val,
            )
        )

    root.finish()
    if problems:
        raise ScenarioError(problems)

    return Scenario(
        name=name,
        node_count=node_count,
        area=Box(float(area_raw[0]), float(area_raw[1]), float(area_raw[2])),
        duration_s=duration_s,
        seed=seed,
        stop_rule=stop_rule,
        trust_enabled=trust_enabled,
        weights=weights,
        relay_weights=relay_weights,
        trust=trust_cfg,
        superframe=superframe,
        mac=mac_cfg,
        channel=channel,
        energy=energy,
        mobility=mobility,
        clustering=clustering,
        traffic=traffic,
        security=security,
        detection=detection,
        adversary=groups,
    )


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"{p}: not valid JSON ({exc})"]) from exc
    return parse_scenario(data, name=p.stem)
