"""Schnorr-group arithmetic: safe-prime parameters, sampling, pow and inverse.

Group elements are plain Python ints; range checks happen at the boundaries
(sampling, deserialization, public operations) rather than through wrapper
types.
"""

from dataclasses import dataclass

from .errors import FormatError, NotInvertibleError, ParamSearchError
from .rng import DeterministicRNG
from .wire import Reader, pack_int

MR_ROUNDS = 40
DEFAULT_BITS_Q = 256
PARAMS_MAGIC = b"ACF1"

_SMALL_PRIMES = [p for p in range(3, 2000) if all(p % d for d in range(2, int(p ** 0.5) + 1))]


@dataclass(frozen=True)
class SystemParams:
    """Schnorr group: P = 2Q + 1 with both prime, g generating the order-Q subgroup."""

    P: int
    Q: int
    g: int

    @property
    def bits_q(self):
        return self.Q.bit_length()

    def validate(self, rng=None):
        if self.P != 2 * self.Q + 1:
            raise ValueError("P != 2Q + 1")
        rng = rng or DeterministicRNG(0, "validate")
        if not is_probable_prime(self.Q, rng) or not is_probable_prime(self.P, rng):
            raise ValueError("P or Q is not prime")
        if not 1 < self.g < self.P or pow(self.g, self.Q, self.P) != 1:
            raise ValueError("g does not generate the order-Q subgroup")
        return self


def is_probable_prime(n, rng=None, rounds=MR_ROUNDS):
    """Miller-Rabin; error probability <= 4**-rounds."""
    if n < 2:
        return False
    for p in (2,) + tuple(_SMALL_PRIMES[:60]):
        if n == p:
            return True
        if n % p == 0:
            return False
    rng = rng or DeterministicRNG(n, "miller-rabin")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def schnorr_params(Q):
    """Parameters for a known Sophie Germain prime Q (used for tiny test groups)."""
    P = 2 * Q + 1
    h = 2
    while pow(h, 2, P) == 1:
        h += 1
    params = SystemParams(P=P, Q=Q, g=pow(h, 2, P))
    return params.validate()


def generate_params(bits_q=DEFAULT_BITS_Q, rng_seed=0, max_candidates=None):
    """Search for a ``bits_q``-bit Q with P = 2Q + 1 prime, deterministically per seed."""
    if bits_q < 8:
        raise ValueError("bits_q must be >= 8")
    rng = DeterministicRNG(rng_seed, "params")
    witness_rng = rng.spawn("witnesses")
    if max_candidates is None:
        max_candidates = 200 * bits_q * bits_q
    top = 1 << (bits_q - 1)
    for _ in range(max_candidates):
        Q = rng.getrandbits(bits_q) | top | 1
        P = 2 * Q + 1
        if any((Q % p == 0 and Q != p) or (P % p == 0 and P != p) for p in _SMALL_PRIMES):
            continue
        # cheap base-2 Fermat filter before the full Miller-Rabin rounds
        if pow(2, Q - 1, Q) != 1 or pow(2, P - 1, P) != 1:
            continue
        if is_probable_prime(Q, witness_rng) and is_probable_prime(P, witness_rng):
            return schnorr_params(Q)
    raise ParamSearchError(f"no safe prime with {bits_q}-bit Q in {max_candidates} candidates")


def zq_rand(params, rng):
    """Uniform element of [1, Q-1] (rejection sampling via randrange)."""
    return 1 + rng.randrange(params.Q - 1)


def zp_rand(params, rng):
    return 1 + rng.randrange(params.P - 1)


def mod_exp(base, exp, params):
    if not 1 <= base < params.P:
        raise ValueError("base must lie in [1, P-1]")
    if exp < 1:
        raise ValueError("exponent must be >= 1")
    return pow(base, exp, params.P)


def mod_inv(a, modulus):
    try:
        return pow(a, -1, modulus)
    except ValueError:
        raise NotInvertibleError(f"{a} is not invertible mod {modulus}") from None


def serialize_params(params):
    return PARAMS_MAGIC + bytes([1]) + pack_int(params.P) + pack_int(params.Q) + pack_int(params.g)


def deserialize_params(data, validate=True):
    r = Reader(data)
    r.magic(PARAMS_MAGIC)
    if r.u8() != 1:
        raise FormatError("unsupported params version")
    P, Q, g = r.integer(), r.integer(), r.integer()
    r.done()
    params = SystemParams(P=P, Q=Q, g=g)
    if validate:
        try:
            params.validate()
        except ValueError as exc:
            raise FormatError(str(exc)) from None
    return params
