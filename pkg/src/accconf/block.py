"""Enabling blocks: build, sign, serialize, revoke, and the multi-subkey plan.

A block carries, per subkey b, gamma_b = tau_b * g^(r*a0) mod P together with
g^r, the partial Lagrangian coefficients of the server x-coordinates and the
transformed server shares <x_j, g^(r*f(x_j))>. Plain blocks share one set of
server shares across all subkeys; reactive blocks (more than t revoked users)
carry one set per subkey.
"""

import hashlib
import math
import struct
from dataclasses import dataclass, field, replace

from .errors import FormatError, KeyDecodeError, SignatureError, ThresholdError
from .group import mod_inv, zq_rand
from .shares import Owner, evaluate, generate_polynomial, generate_shares
from .wire import Reader, int_width, pack_bytes, pack_int

BLOCK_MAGIC = b"ACFB"
KEY_MAGIC = b"ACFK"
HASH_SHA256 = 1
_HASHES = {HASH_SHA256: hashlib.sha256}
CHECKSUM_BYTES = 4


def _hash(data, alg=HASH_SHA256):
    try:
        return _HASHES[alg](data).digest()
    except KeyError:
        raise FormatError(f"unknown hash algorithm tag {alg}") from None


# -- signatures -------------------------------------------------------------

@dataclass(frozen=True)
class ProviderSigningKey:
    """Schnorr signing key over the system group; vk = g^sk mod P."""

    sk: int
    vk: int

    @classmethod
    def generate(cls, params, rng):
        sk = zq_rand(params, rng)
        return cls(sk, pow(params.g, sk, params.P))

    def sign(self, message, params, alg=HASH_SHA256):
        wq = int_width(params.Q)
        # deterministic nonce derived from the secret and the message
        k = int.from_bytes(_hash(self.sk.to_bytes(wq, "big") + message, alg), "big") % (params.Q - 1) + 1
        R = pow(params.g, k, params.P)
        e = _challenge(R, message, params, alg)
        s = (k + e * self.sk) % params.Q
        return e.to_bytes(wq, "big") + s.to_bytes(wq, "big")


def _challenge(R, message, params, alg):
    return int.from_bytes(_hash(R.to_bytes(int_width(params.P), "big") + message, alg), "big") % params.Q


def verify_signature(vk, message, signature, params, alg=HASH_SHA256):
    wq = int_width(params.Q)
    if len(signature) != 2 * wq:
        return False
    if not 1 < vk < params.P or pow(vk, params.Q, params.P) != 1:
        return False
    e = int.from_bytes(signature[:wq], "big")
    s = int.from_bytes(signature[wq:], "big")
    if e >= params.Q or s >= params.Q:
        return False
    R = pow(params.g, s, params.P) * pow(vk, params.Q - e, params.P) % params.P
    return _challenge(R, message, params, alg) == e


def serialize_verify_key(vk):
    return KEY_MAGIC + bytes([1]) + pack_int(vk)


def deserialize_verify_key(data):
    r = Reader(data)
    r.magic(KEY_MAGIC)
    if r.u8() != 1:
        raise FormatError("unsupported key version")
    vk = r.integer()
    r.done()
    return vk


# -- subkey encoding ----------------------------------------------------------

def subkey_width(params):
    """Bytes per subkey chunk; chunk + 1 always lands in [1, Q-1]."""
    return (params.bits_q - 1) // 8


def encode_key(key_bytes, params, min_subkeys=1):
    """Frame ``key_bytes`` (length prefix + checksum) and split into subkeys tau_b in Z*_Q."""
    if not key_bytes:
        raise ValueError("key must be non-empty")
    w = subkey_width(params)
    if w < 1:
        raise ValueError("group too small to carry key bytes; use integer subkeys")
    framed = struct.pack(">I", len(key_bytes)) + key_bytes + _hash(key_bytes)[:CHECKSUM_BYTES]
    m = max(min_subkeys, math.ceil(len(framed) / w))
    framed = framed.ljust(m * w, b"\x00")
    return [int.from_bytes(framed[b * w:(b + 1) * w], "big") + 1 for b in range(m)]


def decode_key(subkeys, params):
    w = subkey_width(params)
    raw = bytearray()
    for tau in subkeys:
        chunk = tau - 1
        if not 0 <= chunk < 1 << (8 * w):
            raise KeyDecodeError("subkey out of range")
        raw += chunk.to_bytes(w, "big")
    if len(raw) < 4:
        raise KeyDecodeError("too few subkeys")
    length = struct.unpack(">I", raw[:4])[0]
    end = 4 + length + CHECKSUM_BYTES
    if length == 0 or end > len(raw) or any(raw[end:]):
        raise KeyDecodeError("bad key framing")
    key = bytes(raw[4:4 + length])
    if _hash(key)[:CHECKSUM_BYTES] != raw[4 + length:end]:
        raise KeyDecodeError("key checksum mismatch")
    return key


# -- block ----------------------------------------------------------------------

def precompute_partial_lagrangians(xs, Q):
    """lambda_hat_k = prod_{j != k} x_j / (x_j - x_k) mod Q over the server x-coordinates."""
    out = []
    for k, xk in enumerate(xs):
        acc = 1
        for j, xj in enumerate(xs):
            if j != k:
                acc = acc * xj * mod_inv((xj - xk) % Q, Q) % Q
        out.append(acc)
    return out


@dataclass(frozen=True)
class BlockShareSet:
    lambda_hats: tuple
    pairs: tuple  # ((x_j, g^(r f(x_j))), ...)

    @property
    def xs(self):
        return tuple(x for x, _ in self.pairs)


@dataclass(frozen=True)
class EnablingBlock:
    gammas: tuple
    g_r: int
    share_sets: tuple
    timeout: int = 0
    version: int = 1
    hash_alg: int = HASH_SHA256
    signature: bytes = b""

    @property
    def m(self):
        return len(self.gammas)

    @property
    def t(self):
        return len(self.share_sets[0].pairs)

    @property
    def lambda_hats(self):
        return self.share_sets[0].lambda_hats

    @property
    def transformed_shares(self):
        return self.share_sets[0].pairs

    def share_set(self, b):
        return self.share_sets[b] if len(self.share_sets) > 1 else self.share_sets[0]

    def is_expired(self, now):
        return self.timeout != 0 and now is not None and now >= self.timeout


def _check_share_set(shares, params):
    xs = [s.x for s in shares]
    if not xs:
        raise ValueError("empty server share set")
    if len(set(xs)) != len(xs):
        raise ValueError("server x-coordinates must be distinct")
    if any(not 1 <= x < params.Q for x in xs):
        raise ValueError("server x-coordinates must lie in Z*_Q")


def assemble_block(subkeys, share_sets, a0, params, signing_key, timeout=0, version=1, rng=None, r=None):
    """Core builder over integer subkeys; ``share_sets`` holds 1 or len(subkeys) lists of shares."""
    if r is None:
        r = zq_rand(params, rng)
    if not 1 <= r < params.Q:
        raise ValueError("r must lie in Z*_Q")
    if len(share_sets) not in (1, len(subkeys)):
        raise ValueError("need one share set, or one per subkey")
    t = len(share_sets[0])
    P, Q, g = params.P, params.Q, params.g
    blind = pow(g, r * a0 % Q, P)
    gammas = []
    for tau in subkeys:
        if not 1 <= tau < P:
            raise ValueError("subkey must lie in [1, P-1]")
        gammas.append(tau * blind % P)
    sets = []
    for shares in share_sets:
        if len(shares) != t:
            raise ValueError("every share set must hold exactly t shares")
        _check_share_set(shares, params)
        xs = [s.x for s in shares]
        pairs = tuple((s.x, pow(g, r * s.fx % Q, P)) for s in shares)
        sets.append(BlockShareSet(tuple(precompute_partial_lagrangians(xs, Q)), pairs))
    block = EnablingBlock(tuple(gammas), pow(g, r, P), tuple(sets), timeout, version)
    return sign_block(block, params, signing_key)


def build_block(key_bytes, server_shares, poly_a0, params, signing_key, timeout=0, rng=None,
                version=1, r=None, min_subkeys=1):
    subkeys = encode_key(key_bytes, params, min_subkeys)
    return assemble_block(subkeys, [list(server_shares)], poly_a0, params, signing_key,
                          timeout, version, rng, r)


def _body(block, params, signature):
    wq, wp = int_width(params.Q), int_width(params.P)
    out = [BLOCK_MAGIC, bytes([1]),
           struct.pack(">QQBHIH", block.version, block.timeout, block.hash_alg,
                       block.m, block.t, len(block.share_sets))]
    out += [pack_int(gm, wp) for gm in block.gammas]
    out.append(pack_int(block.g_r, wp))
    for ss in block.share_sets:
        out += [pack_int(lh, wq) for lh in ss.lambda_hats]
        for x, y in ss.pairs:
            out.append(pack_int(x, wq) + pack_int(y, wp))
    out.append(pack_bytes(signature))
    return b"".join(out)


def signing_payload(block, params):
    return _body(block, params, bytes(2 * int_width(params.Q)))


def sign_block(block, params, signing_key):
    sig = signing_key.sign(signing_payload(block, params), params, block.hash_alg)
    return replace(block, signature=sig)


def verify_block(block, vk, params):
    return verify_signature(vk, signing_payload(block, params), block.signature, params, block.hash_alg)


def serialize_block(block, params):
    return _body(block, params, block.signature)


def deserialize_block(data, params, verify_key=None):
    wq, wp = int_width(params.Q), int_width(params.P)
    r = Reader(data)
    r.magic(BLOCK_MAGIC)
    if r.u8() != 1:
        raise FormatError("unsupported block format version")
    version, timeout, alg = r.u64(), r.u64(), r.u8()
    if alg not in _HASHES:
        raise FormatError(f"unknown hash algorithm tag {alg}")
    m, t, n_sets = r.u16(), r.u32(), r.u16()
    if m < 1 or t < 1 or n_sets not in (1, m):
        raise FormatError("inconsistent block dimensions")
    gammas = tuple(r.integer(wp, params.P) for _ in range(m))
    g_r = r.integer(wp, params.P)
    sets = []
    for _ in range(n_sets):
        lhats = tuple(r.integer(wq, params.Q) for _ in range(t))
        pairs = tuple((r.integer(wq, params.Q), r.integer(wp, params.P)) for _ in range(t))
        sets.append(BlockShareSet(lhats, pairs))
    signature = r.blob()
    r.done()
    block = EnablingBlock(gammas, g_r, tuple(sets), timeout, version, alg, signature)
    if verify_key is not None and not verify_block(block, verify_key, params):
        raise SignatureError("enabling block signature does not verify")
    return block


def block_size_model(params, t, m=1, n_sets=1):
    """Serialized size in bytes: fixed header plus terms linear in m and t."""
    wq, wp = int_width(params.Q), int_width(params.P)
    header = 4 + 1 + 8 + 8 + 1 + 2 + 4 + 2
    return (header + m * (4 + wp) + (4 + wp)
            + n_sets * t * ((4 + wq) + (4 + wq) + (4 + wp)) + 4 + 2 * wq)


# -- revocation ----------------------------------------------------------------

class BlockState:
    """Mutable publisher state: current server slots, revocations, latest block.

    Single writer; readers use ``block``, which is replaced atomically.
    """

    def __init__(self, params, poly, server_shares, signing_key, key_bytes, timeout=0,
                 registry=None, min_subkeys=1):
        if len(server_shares) != poly.t:
            raise ValueError("need exactly t server shares")
        self.params = params
        self.poly = poly
        self.slots = list(server_shares)
        self.signing_key = signing_key
        self.key_bytes = key_bytes
        self.timeout = timeout
        self.registry = registry
        self.min_subkeys = min_subkeys
        self.revoked = []
        self.version = 0
        self.block = None

    @property
    def t(self):
        return self.poly.t

    def rebuild(self, rng, timeout=None):
        if timeout is not None:
            self.timeout = timeout
        self.version += 1
        self.block = build_block(self.key_bytes, self.slots, self.poly.a0, self.params,
                                 self.signing_key, self.timeout, rng, self.version,
                                 min_subkeys=self.min_subkeys)
        return self.block

    def rekey(self, key_bytes, rng):
        self.key_bytes = key_bytes
        return self.rebuild(rng)


def revoke_user(state, revoked_share, rng):
    """Fold a revoked user's tuple into the next original server slot (FIFO) and rebuild."""
    if revoked_share.x in {s.x for s in state.slots}:
        raise ValueError("share is already part of the server set")
    if evaluate(state.poly, revoked_share.x) != revoked_share.fx:
        raise ValueError("share does not lie on the system polynomial")
    if state.registry is not None:
        uid = revoked_share.user_id
        if uid not in state.registry or state.registry[uid].x != revoked_share.x:
            raise ValueError(f"user {uid} is not registered")
    if len(state.revoked) >= state.t:
        raise ThresholdError(f"already {len(state.revoked)} revocations with t={state.t}; re-key or use a subkey plan")
    slot = len(state.revoked)
    state.slots[slot] = replace(revoked_share, owner=Owner.REVOKED)
    state.revoked.append(revoked_share)
    if state.registry is not None:
        state.registry.mark_revoked(revoked_share.user_id)
    return state.rebuild(rng)


def refresh_timeout(turnover_per_sec, base_constant, eps=1e-9, to_min=60.0, to_max=86400.0):
    """Timeout inversely proportional to user turnover, clamped to [to_min, to_max]."""
    if turnover_per_sec < 0:
        raise ValueError("turnover must be non-negative")
    return min(max(base_constant / max(turnover_per_sec, eps), to_min), to_max)


# -- more than t revoked users ---------------------------------------------------

@dataclass(frozen=True)
class SubkeyPlan:
    m: int
    assignments: tuple  # per subkey: tuple of exactly t shares

    def covers(self, share):
        return any(share.x in {s.x for s in a} for a in self.assignments)


def plan_subkeys(revoked, t, m, spare_server_shares):
    """Fill subkey slots with revoked shares in order, padding with spare server shares."""
    revoked = list(revoked)
    if m < max(1, math.ceil(len(revoked) / t)):
        raise ValueError(f"m={m} subkeys cannot cover {len(revoked)} revoked users at t={t}")
    spares = list(spare_server_shares)
    assignments = []
    for b in range(m):
        chosen = [s.revoked() if s.owner != Owner.REVOKED else s for s in revoked[b * t:(b + 1) * t]]
        need = t - len(chosen)
        if need > len(spares):
            raise ValueError("not enough spare server shares to pad subkey slots")
        chosen += spares[:need]
        assignments.append(tuple(chosen))
    return SubkeyPlan(m, tuple(assignments))


def build_reactive_block(key_bytes, plan, poly_a0, params, signing_key, timeout=0, rng=None, version=1, r=None):
    subkeys = encode_key(key_bytes, params, plan.m)
    if len(subkeys) != plan.m:
        raise ValueError(f"key needs {len(subkeys)} subkeys but the plan has {plan.m}")
    return assemble_block(subkeys, [list(a) for a in plan.assignments], poly_a0, params,
                          signing_key, timeout, version, rng, r)


# -- clustering -------------------------------------------------------------------

@dataclass
class Cluster:
    cluster_id: int
    params: object
    poly: object
    registry: object
    state: BlockState = field(repr=False)

    @property
    def server_shares(self):
        return self.state.slots

    @property
    def current_block(self):
        return self.state.block


def make_clusters(params, sizes, t_prime, key_bytes, signing_key, rng, timeout=0):
    """Independent polynomial, registry and block per cluster of the given sizes."""
    clusters = []
    for cid, n in enumerate(sizes):
        sub = rng.spawn(f"cluster-{cid}")
        poly = generate_polynomial(params, t_prime, sub)
        server, registry = generate_shares(poly, params, n, t_prime, sub)
        state = BlockState(params, poly, server, signing_key, key_bytes, timeout, registry)
        state.rebuild(sub)
        clusters.append(Cluster(cid, params, poly, registry, state))
    return clusters
