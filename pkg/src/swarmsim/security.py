"""Frame protection: signatures, key agreement, and authenticated encryption.

Two interchangeable backends implement the same byte-level contract:

* ``real`` -- ECDSA/ECDH on P-256 plus AES-256-GCM from ``cryptography``.
* ``modeled`` -- keyed-hash stand-ins with identical sizes and identical
  accept/reject behavior, cheap enough for large batch runs.

Wire layout of a protected payload is ``[nonce:12][tag:16][sig:0 or 64]``
appended after the ciphertext.  Signatures are reserved for control frames
(beacons, schedule announcements, trust reports); bulk telemetry rides on
AEAD alone.  Backend choice never changes a delivery decision, only the
configured processing-time constants, so metrics agree across backends for
the same seed.

Private key material stays inside :class:`Identity` and is excluded from
``repr`` so it can never leak into traces or reports.
"""

from __future__ import annotations

import hashlib
import hmac as hmac_mod
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import ec, utils as asn1_utils
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .engine import SimTime, us_from_ms

NONCE_BYTES = 12
TAG_BYTES = 16
SIG_BYTES = 64
KEY_BYTES = 32

MODELED = "modeled"
REAL = "real"


class IntegrityError(Exception):
    """Ciphertext or tag failed authentication."""


class NonceReuseError(RuntimeError):
    """A nonce was replayed within a session; this is a simulation fault."""


@dataclass(frozen=True)
class ProcessingDelays:
    """Constant-time costs charged for cryptographic work, in milliseconds."""

    aead_ms_per_256b: float = 1.6
    verify_ms: float = 3.5
    sign_ms: float = 3.5
    trust_update_ms: float = 0.08

    def aead_us(self, payload_bytes: int) -> SimTime:
        # Pro-rated linearly in the payload size.
        return us_from_ms(self.aead_ms_per_256b * payload_bytes / 256.0)

    def sign_us(self) -> SimTime:
        return us_from_ms(self.sign_ms)

    def verify_us(self) -> SimTime:
        return us_from_ms(self.verify_ms)

    def trust_update_us(self) -> SimTime:
        return us_from_ms(self.trust_update_ms)


@dataclass
class Identity:
    """Key material for one node.  Private halves never leave this object."""

    node_id: int
    sign_private: object
    sign_public: bytes
    kx_private: object
    kx_public: bytes

    def __repr__(self) -> str:  # keep secrets out of logs and traces
        return f"Identity(node_id={self.node_id})"


@dataclass(slots=True)
class SecureEnvelope:
    """Sealed payload plus its authentication trailer."""

    src: int
    dst: int
    ciphertext: bytes
    nonce: bytes
    tag: bytes
    signature: bytes = b""

    @property
    def trailer_bytes(self) -> int:
        return NONCE_BYTES + TAG_BYTES + len(self.signature)

    @property
    def wire_bytes(self) -> int:
        return len(self.ciphertext) + self.trailer_bytes


def _sha(*parts: bytes) -> bytes:
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return h.digest()


class ModeledBackend:
    """Deterministic keyed-hash stand-ins with real-backend semantics."""

    name = MODELED

    def make_identity(self, node_id: int, seed_material: bytes) -> Identity:
        tag = node_id.to_bytes(4, "big")
        sign_priv = _sha(b"sign-priv", seed_material, tag)
        kx_priv = _sha(b"kx-priv", seed_material, tag)
        return Identity(
            node_id=node_id,
            sign_private=sign_priv,
            sign_public=_sha(b"sign-pub", sign_priv),
            kx_private=kx_priv,
            kx_public=_sha(b"kx-pub", kx_priv),
        )

    def sign(self, identity: Identity, message: bytes) -> bytes:
        # HMAC-SHA512 keyed on the public half: 64 bytes, recomputable by
        # any verifier, unforgeable within the model (adversaries in the
        # simulator never call sign with someone else's identity).
        return hmac_mod.new(identity.sign_public, message, hashlib.sha512).digest()

    def verify(self, public: bytes, message: bytes, signature: bytes) -> bool:
        expect = hmac_mod.new(public, message, hashlib.sha512).digest()
        return hmac_mod.compare_digest(expect, signature)

    def derive_session(self, identity: Identity, peer_public: bytes) -> bytes:
        lo, hi = sorted((identity.kx_public, peer_public))
        return _sha(b"session", lo, hi)

    def seal(self, key: bytes, nonce: bytes, plaintext: bytes, aad: bytes) -> tuple[bytes, bytes]:
        ct = _xor_keystream(key, nonce, plaintext)
        tag = _sha(b"tag", key, nonce, aad, ct)[:TAG_BYTES]
        return ct, tag

    def open(self, key: bytes, nonce: bytes, ciphertext: bytes, tag: bytes, aad: bytes) -> bytes:
        expect = _sha(b"tag", key, nonce, aad, ciphertext)[:TAG_BYTES]
        if not hmac_mod.compare_digest(expect, tag):
            raise IntegrityError("modeled AEAD tag mismatch")
        return _xor_keystream(key, nonce, ciphertext)


def _xor_keystream(key: bytes, nonce: bytes, data: bytes) -> bytes:
    out = bytearray(len(data))
    block = 0
    for offset in range(0, len(data), 32):
        ks = _sha(b"ks", key, nonce, block.to_bytes(4, "big"))
        chunk = data[offset : offset + 32]
        for i, b in enumerate(chunk):
            out[offset + i] = b ^ ks[i]
        block += 1
    return bytes(out)


class RealBackend:
    """P-256 ECDSA/ECDH plus AES-256-GCM."""

    name = REAL
    _curve = ec.SECP256R1()

    def make_identity(self, node_id: int, seed_material: bytes) -> Identity:
        tag = node_id.to_bytes(4, "big")
        order = self._curve.key_size  # 256-bit curve
        sign_scalar = 1 + int.from_bytes(_sha(b"sign-priv", seed_material, tag), "big") % (
            2**order - 1
        )
        kx_scalar = 1 + int.from_bytes(_sha(b"kx-priv", seed_material, tag), "big") % (
            2**order - 1
        )
        sign_key = ec.derive_private_key(sign_scalar, self._curve)
        kx_key = ec.derive_private_key(kx_scalar, self._curve)
        return Identity(
            node_id=node_id,
            sign_private=sign_key,
            sign_public=_public_bytes(sign_key.public_key()),
            kx_private=kx_key,
            kx_public=_public_bytes(kx_key.public_key()),
        )

    def sign(self, identity: Identity, message: bytes) -> bytes:
        der = identity.sign_private.sign(message, ec.ECDSA(hashes.SHA256()))
        r, s = asn1_utils.decode_dss_signature(der)
        return r.to_bytes(32, "big") + s.to_bytes(32, "big")

    def verify(self, public: bytes, message: bytes, signature: bytes) -> bool:
        if len(signature) != SIG_BYTES:
            return False
        r = int.from_bytes(signature[:32], "big")
        s = int.from_bytes(signature[32:], "big")
        try:
            der = asn1_utils.encode_dss_signature(r, s)
            _load_public(public).verify(der, message, ec.ECDSA(hashes.SHA256()))
            return True
        except (InvalidSignature, ValueError):
            return False

    def derive_session(self, identity: Identity, peer_public: bytes) -> bytes:
        shared = identity.kx_private.exchange(ec.ECDH(), _load_public(peer_public))
        return HKDF(
            algorithm=hashes.SHA256(), length=KEY_BYTES, salt=None, info=b"swarm-session"
        ).derive(shared)

    def seal(self, key: bytes, nonce: bytes, plaintext: bytes, aad: bytes) -> tuple[bytes, bytes]:
        blob = AESGCM(key).encrypt(nonce, plaintext, aad)
        return blob[:-TAG_BYTES], blob[-TAG_BYTES:]

    def open(self, key: bytes, nonce: bytes, ciphertext: bytes, tag: bytes, aad: bytes) -> bytes:
        from cryptography.exceptions import InvalidTag

        try:
            return AESGCM(key).decrypt(nonce, ciphertext + tag, aad)
        except InvalidTag as exc:
            raise IntegrityError("AES-GCM tag mismatch") from exc


def _public_bytes(public_key: ec.EllipticCurvePublicKey) -> bytes:
    return public_key.public_bytes(
        serialization.Encoding.X962, serialization.PublicFormat.UncompressedPoint
    )


def _load_public(data: bytes) -> ec.EllipticCurvePublicKey:
    return ec.EllipticCurvePublicKey.from_encoded_point(ec.SECP256R1(), data)


def make_backend(name: str):
    if name == MODELED:
        return ModeledBackend()
    if name == REAL:
        return RealBackend()
    raise ValueError(f"unknown crypto backend {name!r}")


class NonceSequence:
    """Monotone per-sender nonce: 2-byte sender id followed by a 10-byte counter."""

    def __init__(self, sender_id: int) -> None:
        self.sender_id = sender_id
        self.counter = 0

    def next(self) -> bytes:
        self.counter += 1
        return self.sender_id.to_bytes(2, "big") + self.counter.to_bytes(10, "big")


class ReplayGuard:
    """Rejects any nonce at or below the high-water mark of its sender."""

    def __init__(self) -> None:
        self._seen: dict[int, int] = {}

    def accept(self, nonce: bytes) -> None:
        sender = int.from_bytes(nonce[:2], "big")
        counter = int.from_bytes(nonce[2:], "big")
        if counter <= self._seen.get(sender, 0):
            raise NonceReuseError(f"nonce replay from sender {sender} (counter {counter})")
        self._seen[sender] = counter


@dataclass
class SecuritySuite:
    """Per-run bundle: backend, identities, cached session keys, delay model."""

    backend: object
    delays: ProcessingDelays = field(default_factory=ProcessingDelays)
    seed_material: bytes = b"swarm"

    def __post_init__(self) -> None:
        self._identities: dict[int, Identity] = {}
        self._sessions: dict[tuple[int, int], bytes] = {}
        self._nonces: dict[int, NonceSequence] = {}

    def identity(self, node_id: int) -> Identity:
        ident = self._identities.get(node_id)
        if ident is None:
            ident = self.backend.make_identity(node_id, self.seed_material)
            self._identities[node_id] = ident
        return ident

    def session_key(self, a: int, b: int) -> bytes:
        pair = (a, b) if a < b else (b, a)
        key = self._sessions.get(pair)
        if key is None:
            key = self.backend.derive_session(self.identity(pair[0]), self.identity(pair[1]).kx_public)
            self._sessions[pair] = key
        return key

    def _nonce_for(self, sender: int) -> bytes:
        seq = self._nonces.get(sender)
        if seq is None:
            seq = NonceSequence(sender)
            self._nonces[sender] = seq
        return seq.next()

    def seal_payload(self, src: int, dst: int, plaintext: bytes, signed: bool = False) -> SecureEnvelope:
        nonce = self._nonce_for(src)
        aad = src.to_bytes(2, "big") + dst.to_bytes(2, "big")
        ct, tag = self.backend.seal(self.session_key(src, dst), nonce, plaintext, aad)
        sig = b""
        if signed:
            sig = self.backend.sign(self.identity(src), aad + nonce + ct + tag)
        return SecureEnvelope(src=src, dst=dst, ciphertext=ct, nonce=nonce, tag=tag, signature=sig)

    def open_payload(self, envelope: SecureEnvelope) -> bytes:
        aad = envelope.src.to_bytes(2, "big") + envelope.dst.to_bytes(2, "big")
        if envelope.signature:
            body = aad + envelope.nonce + envelope.ciphertext + envelope.tag
            if not self.backend.verify(
                self.identity(envelope.src).sign_public, body, envelope.signature
            ):
                raise IntegrityError("signature rejected")
        return self.backend.open(
            self.session_key(envelope.src, envelope.dst),
            envelope.nonce,
            envelope.ciphertext,
            envelope.tag,
            aad,
        )
