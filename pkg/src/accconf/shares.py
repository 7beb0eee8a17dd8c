"""Secret polynomial, server/user share generation and user registration."""

import enum
import struct
from dataclasses import dataclass, field, replace

from .errors import CapacityError, FormatError
from .group import zq_rand
from .wire import Reader, pack_int

SHARE_MAGIC = b"ACFS"
SHARE_SET_MAGIC = b"ACFE"

# beyond this many group elements we never fall back to enumerating free x values
_ENUMERATION_LIMIT = 1 << 20


class Owner(enum.IntEnum):
    SERVER = 0
    USER = 1
    REVOKED = 2


@dataclass(frozen=True)
class SecretPolynomial:
    """p(x) = a_0 + a_1 x + ... + a_t x^t over Z_Q, all coefficients nonzero."""

    coeffs: tuple
    Q: int

    @property
    def t(self):
        return len(self.coeffs) - 1

    @property
    def a0(self):
        return self.coeffs[0]

    def __call__(self, x):
        return evaluate(self, x)


@dataclass(frozen=True)
class ShareTuple:
    x: int
    fx: int
    owner: Owner = Owner.SERVER
    user_id: int = 0
    expiry: int = 0  # UNIX seconds, 0 = none

    def revoked(self):
        return replace(self, owner=Owner.REVOKED)


def generate_polynomial(params, t, rng):
    if not 1 <= t < params.Q - 1:
        raise ValueError(f"threshold t={t} outside [1, Q-2]")
    return SecretPolynomial(tuple(zq_rand(params, rng) for _ in range(t + 1)), params.Q)


def evaluate(poly, x):
    """Horner evaluation mod Q."""
    acc = 0
    for c in reversed(poly.coeffs):
        acc = (acc * x + c) % poly.Q
    return acc


class _XAllocator:
    """Hands out fresh x in Z*_Q with p(x) != 0, never reusing one."""

    def __init__(self, poly, params, used=()):
        self.poly = poly
        self.params = params
        self.used = set(used)

    def draw(self, rng):
        for _ in range(64):
            x = zq_rand(self.params, rng)
            if x not in self.used:
                fx = evaluate(self.poly, x)
                if fx:
                    self.used.add(x)
                    return x, fx
        if self.params.Q > _ENUMERATION_LIMIT:
            raise CapacityError("could not find an unused x-coordinate")
        free = [x for x in range(1, self.params.Q) if x not in self.used and evaluate(self.poly, x)]
        if not free:
            raise CapacityError("all usable x-coordinates are allocated")
        x = free[rng.randrange(len(free))]
        self.used.add(x)
        return x, evaluate(self.poly, x)


@dataclass
class UserRegistry:
    """user_id -> share, plus every x already spent (server shares included)."""

    poly: SecretPolynomial
    shares: dict = field(default_factory=dict)
    used_x: set = field(default_factory=set)

    @property
    def n(self):
        return len(self.shares)

    def __getitem__(self, user_id):
        return self.shares[user_id]

    def __contains__(self, user_id):
        return user_id in self.shares

    def active(self):
        return [s for s in self.shares.values() if s.owner == Owner.USER]

    def mark_revoked(self, user_id):
        self.shares[user_id] = self.shares[user_id].revoked()
        return self.shares[user_id]


def generate_shares(poly, params, n, t, rng, expiry=0):
    """t server shares and n user shares (user ids 1..n), all x distinct, all f(x) != 0.

    Returns ``(server_shares, registry)`` where ``server_shares`` is a list.
    """
    if t != poly.t:
        raise ValueError("t does not match the polynomial degree")
    if n < 0:
        raise ValueError("n must be non-negative")
    if n + t > params.Q - 1:
        raise CapacityError(f"n + t = {n + t} exceeds the {params.Q - 1} nonzero x-coordinates")
    alloc = _XAllocator(poly, params)
    server = [ShareTuple(*alloc.draw(rng), owner=Owner.SERVER) for _ in range(t)]
    registry = UserRegistry(poly)
    for uid in range(1, n + 1):
        x, fx = alloc.draw(rng)
        registry.shares[uid] = ShareTuple(x, fx, Owner.USER, uid, expiry)
    registry.used_x = alloc.used
    return server, registry


def register_user(registry, user_id, poly, params, rng, expiry=0):
    """Issue a fresh share to a new user; the share is returned for out-of-band delivery."""
    if user_id in registry.shares:
        raise ValueError(f"user {user_id} is already registered")
    if user_id <= 0:
        raise ValueError("user ids must be positive")
    if len(registry.used_x) + 1 > params.Q - 1:
        raise CapacityError("no new users can be added")
    alloc = _XAllocator(poly, params, registry.used_x)
    x, fx = alloc.draw(rng)
    registry.used_x = alloc.used
    share = ShareTuple(x, fx, Owner.USER, user_id, expiry)
    registry.shares[user_id] = share
    return share


def interpolate_at_zero(points, Q):
    """Lagrange interpolation of the constant term from (x, y) pairs."""
    xs = [x for x, _ in points]
    if len(set(x % Q for x in xs)) != len(xs):
        raise ValueError("duplicate x-coordinates")
    total = 0
    for k, (xk, yk) in enumerate(points):
        num, den = 1, 1
        for j, xj in enumerate(xs):
            if j != k:
                num = num * xj % Q
                den = den * (xj - xk) % Q
        total = (total + yk * num * pow(den, -1, Q)) % Q
    return total


def serialize_share(share):
    return (SHARE_MAGIC + bytes([1, int(share.owner)])
            + struct.pack(">QQ", share.user_id, share.expiry)
            + pack_int(share.x) + pack_int(share.fx))


def deserialize_share(data):
    r = Reader(data)
    share = _read_share(r)
    r.done()
    return share


def _read_share(r):
    r.magic(SHARE_MAGIC)
    if r.u8() != 1:
        raise FormatError("unsupported share version")
    tag = r.u8()
    try:
        owner = Owner(tag)
    except ValueError:
        raise FormatError(f"unknown owner tag {tag}") from None
    user_id, expiry = r.u64(), r.u64()
    x, fx = r.integer(), r.integer()
    if x == 0:
        raise FormatError("share x must be nonzero")
    if owner == Owner.SERVER and user_id != 0:
        raise FormatError("server share with a user id")
    return ShareTuple(x, fx, owner, user_id, expiry)


def serialize_share_set(shares):
    out = [SHARE_SET_MAGIC, bytes([1]), struct.pack(">I", len(shares))]
    for s in shares:
        blob = serialize_share(s)
        out.append(struct.pack(">I", len(blob)) + blob)
    return b"".join(out)


def deserialize_share_set(data):
    r = Reader(data)
    r.magic(SHARE_SET_MAGIC)
    if r.u8() != 1:
        raise FormatError("unsupported share-set version")
    count = r.u32()
    shares = [deserialize_share(r.blob()) for _ in range(count)]
    r.done()
    return shares
