import itertools

import pytest
from hypothesis import given, settings, strategies as st

from accconf.errors import CapacityError, FormatError
from accconf.group import SystemParams, generate_params
from accconf.rng import DeterministicRNG
from accconf.shares import (Owner, SecretPolynomial, ShareTuple, deserialize_share, deserialize_share_set,
                            evaluate, generate_polynomial, generate_shares, interpolate_at_zero, register_user,
                            serialize_share, serialize_share_set)

from conftest import brute_inv


def brute_interpolate(points, Q):
    total = 0
    for k, (xk, yk) in enumerate(points):
        lam = 1
        for j, (xj, _) in enumerate(points):
            if j != k:
                lam = lam * xj * brute_inv((xj - xk) % Q, Q) % Q
        total += yk * lam
    return total % Q


def test_evaluate_examples(tiny):
    poly = SecretPolynomial((3, 2), 11)
    assert evaluate(poly, 1) == 5
    assert evaluate(poly, 2) == 7
    assert poly(4) == 0  # 3 + 8 = 11


def test_generate_polynomial(tiny):
    poly = generate_polynomial(tiny, 1, DeterministicRNG(0))
    assert len(poly.coeffs) == 2 and all(1 <= c <= 10 for c in poly.coeffs)
    assert poly == generate_polynomial(tiny, 1, DeterministicRNG(0))
    with pytest.raises(ValueError):
        generate_polynomial(tiny, 0, DeterministicRNG(0))
    with pytest.raises(ValueError):
        generate_polynomial(tiny, 10, DeterministicRNG(0))


def test_generate_shares_tiny(tiny, rng):
    poly = generate_polynomial(tiny, 1, rng)
    server, reg = generate_shares(poly, tiny, 3, 1, rng)
    assert len(server) == 1 and reg.n == 3
    xs = [s.x for s in server] + [s.x for s in reg.shares.values()]
    assert len(set(xs)) == 4
    for s in server + list(reg.shares.values()):
        assert evaluate(poly, s.x) == s.fx != 0


def test_capacity_exceeded_tiny(tiny, rng):
    poly = SecretPolynomial((3, 2), 11)
    with pytest.raises(CapacityError):
        generate_shares(poly, tiny, 10, 1, rng)
    # n + t = Q - 1 needs every nonzero x, but x = 4 is a root of 3 + 2x
    usable = [x for x in range(1, 11) if evaluate(poly, x)]
    assert len(usable) == 9
    with pytest.raises(CapacityError):
        generate_shares(poly, tiny, 9, 1, rng)
    server, reg = generate_shares(poly, tiny, 8, 1, rng)
    assert sorted([server[0].x] + [s.x for s in reg.shares.values()]) == usable


def test_register_user(tiny):
    rng = DeterministicRNG(2)
    poly = SecretPolynomial((3, 2), 11)
    server, reg = generate_shares(poly, tiny, 3, 1, rng)
    before = set(reg.used_x)
    share = register_user(reg, 99, poly, tiny, rng, expiry=1234)
    assert share.x not in before and share.fx == evaluate(poly, share.x)
    assert share.owner == Owner.USER and share.user_id == 99 and share.expiry == 1234
    with pytest.raises(ValueError):
        register_user(reg, 99, poly, tiny, rng)
    while len(reg.used_x) < 9:
        register_user(reg, 100 + len(reg.used_x), poly, tiny, rng)
    with pytest.raises(CapacityError):
        register_user(reg, 500, poly, tiny, rng)


def test_interpolation_recovers_a0_from_any_t_plus_1(params64, rng):
    poly = generate_polynomial(params64, 4, rng)
    server, reg = generate_shares(poly, params64, 6, 4, rng)
    pts = [(s.x, s.fx) for s in server + list(reg.shares.values())]
    for subset in itertools.combinations(pts, 5):
        assert interpolate_at_zero(list(subset), params64.Q) == poly.a0


def test_interpolation_matches_brute_force_tiny():
    poly = SecretPolynomial((3, 2, 7), 11)
    pts = [(x, evaluate(poly, x)) for x in (1, 5, 9)]
    assert interpolate_at_zero(pts, 11) == brute_interpolate(pts, 11) == 3


def test_t_shares_do_not_determine_a0():
    Q = 11
    # exhaustive: for every pair of points, every a0 is consistent with some degree-2 polynomial
    for (x1, x2) in itertools.combinations(range(1, Q), 2):
        for y1, y2 in [(1, 1), (4, 9)]:
            a0s = set()
            for a1 in range(Q):
                for a2 in range(Q):
                    p = SecretPolynomial((0, a1, a2), Q)
                    for a0 in range(Q):
                        if (a0 + evaluate(p, x1)) % Q == y1 and (a0 + evaluate(p, x2)) % Q == y2:
                            a0s.add(a0)
            assert a0s == set(range(Q))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 20), st.integers(0, 2 ** 32))
def test_share_distinctness_property(t, n, seed):
    params = generate_params(16, 1)
    rng = DeterministicRNG(seed)
    poly = generate_polynomial(params, t, rng)
    server, reg = generate_shares(poly, params, n, t, rng)
    xs = [s.x for s in server] + [s.x for s in reg.shares.values()]
    assert len(xs) == len(set(xs)) == n + t
    assert reg.n == n


def test_share_serialization_round_trip():
    for s in [ShareTuple(3, 9), ShareTuple(2 ** 255 + 7, 12345, Owner.USER, 42, 1_700_000_000),
              ShareTuple(5, 1, Owner.REVOKED, 7, 0)]:
        blob = serialize_share(s)
        assert blob[:4] == b"ACFS"
        assert deserialize_share(blob) == s
        assert serialize_share(deserialize_share(blob)) == blob


def test_share_file_layout():
    blob = serialize_share(ShareTuple(0x0102, 0x03, Owner.USER, 5, 6))
    assert blob == (b"ACFS\x01\x01" + (5).to_bytes(8, "big") + (6).to_bytes(8, "big")
                    + b"\x00\x00\x00\x02\x01\x02" + b"\x00\x00\x00\x01\x03")


def test_share_deserialize_rejects_bad_input():
    blob = serialize_share(ShareTuple(3, 9, Owner.USER, 1))
    with pytest.raises(FormatError):
        deserialize_share(blob + b"\x00")
    bad = bytearray(blob)
    bad[5] = 9
    with pytest.raises(FormatError):
        deserialize_share(bytes(bad))


def test_share_set_round_trip():
    shares = [ShareTuple(3, 9), ShareTuple(4, 1, Owner.REVOKED, 8)]
    blob = serialize_share_set(shares)
    assert deserialize_share_set(blob) == shares
