import pytest
from hypothesis import given, settings, strategies as st

from accconf.block import ProviderSigningKey, assemble_block, build_block, sign_block
from accconf.errors import ExpiredError, KeyDecodeError, RevokedShareError, SignatureError
from accconf.extraction import extract, extract_no_precompute, recover_subkeys
from accconf.group import generate_params
from accconf.rng import DeterministicRNG
from accconf.shares import Owner, ShareTuple, generate_polynomial, generate_shares

from conftest import brute_inv, slow_pow

KEY = b"sixteen byte key"


def test_tiny_vector_every_step(tiny, rng):
    sk = ProviderSigningKey.generate(tiny, rng)
    blk = assemble_block([5], [[ShareTuple(1, 5)]], 3, tiny, sk, r=4)
    user = ShareTuple(2, 7, Owner.USER, 1)
    res = recover_subkeys(blk, user, tiny)
    tr = res.traces[0]
    assert tr.lambdas == [1 * 2 * brute_inv(2 - 1, 11) % 11] == [2]
    assert tr.delta1 == slow_pow(6, 2, 23) == 13
    assert tr.lambda_user == 1 * brute_inv((1 - 2) % 11, 11) == 10
    assert tr.delta2 == slow_pow(16, 70 % 11, 23) == 9
    assert tr.delta1 * tr.delta2 % 23 == 2 == slow_pow(2, 12 % 11, 23)
    assert res.subkeys == [10 * brute_inv(2, 23) % 23] == [5]
    assert recover_subkeys(blk, user, tiny, precomputed=False).subkeys == [5]


def test_share_inside_block_is_revoked(tiny, rng):
    sk = ProviderSigningKey.generate(tiny, rng)
    blk = assemble_block([5], [[ShareTuple(1, 5)]], 3, tiny, sk, r=4)
    with pytest.raises(RevokedShareError):
        recover_subkeys(blk, ShareTuple(1, 5, Owner.USER, 1), tiny)
    with pytest.raises(RevokedShareError):
        recover_subkeys(blk, ShareTuple(1, 5, Owner.USER, 1), tiny, precomputed=False)


@pytest.fixture(scope="module")
def world():
    params = generate_params(64, 21)
    rng = DeterministicRNG(21)
    poly = generate_polynomial(params, 6, rng)
    server, reg = generate_shares(poly, params, 40, 6, rng)
    sk = ProviderSigningKey.generate(params, rng)
    blk = build_block(KEY, server, poly.a0, params, sk, timeout=1000, rng=rng)
    return params, poly, server, reg, sk, blk


def test_every_user_recovers_the_key(world):
    params, poly, server, reg, sk, blk = world
    for share in reg.shares.values():
        assert extract(blk, share, params, sk.vk, now=0).key_bytes == KEY
        assert extract_no_precompute(blk, share, params, sk.vk, now=0).key_bytes == KEY


def test_bad_signature_rejected(world):
    params, poly, server, reg, sk, blk = world
    other = ProviderSigningKey.generate(params, DeterministicRNG(99))
    with pytest.raises(SignatureError):
        extract(blk, reg[1], params, other.vk, now=0)


def test_expiry(world):
    params, poly, server, reg, sk, blk = world
    with pytest.raises(ExpiredError):
        extract(blk, reg[1], params, sk.vk, now=1000)
    expired_share = ShareTuple(reg[1].x, reg[1].fx, Owner.USER, 1, expiry=10)
    with pytest.raises(ExpiredError):
        extract(blk, expired_share, params, sk.vk, now=10)


def test_tampered_gamma_caught_by_checksum(world):
    params, poly, server, reg, sk, blk = world
    from dataclasses import replace
    bad = sign_block(replace(blk, gammas=(blk.gammas[0] * 4 % params.P,) + blk.gammas[1:]), params, sk)
    with pytest.raises(KeyDecodeError):
        extract(bad, reg[1], params, sk.vk, now=0)


def test_wrong_polynomial_share_fails(world):
    params, poly, server, reg, sk, blk = world
    stranger = ShareTuple(reg[1].x, (reg[1].fx + 1) % params.Q, Owner.USER, 1)
    with pytest.raises(KeyDecodeError):
        extract(blk, stranger, params, sk.vk, now=0)


def test_operation_counts_exact(world):
    params, poly, server, reg, sk, blk = world
    t = blk.t
    g = extract(blk, reg[1], params, sk.vk, now=0)
    np_ = extract_no_precompute(blk, reg[1], params, sk.vk, now=0)
    assert g.exp_count == np_.exp_count == t + 1
    assert g.mult_count == 4 * t
    assert np_.mult_count == 2 * t * t + t


@pytest.mark.parametrize("t", [8, 16, 32, 64])
def test_precompute_ratio_grows_linearly(t):
    params = generate_params(64, 5)
    rng = DeterministicRNG(t)
    poly = generate_polynomial(params, t, rng)
    server, reg = generate_shares(poly, params, 2, t, rng)
    sk = ProviderSigningKey.generate(params, rng)
    blk = build_block(KEY, server, poly.a0, params, sk, rng=rng)
    g = extract(blk, reg[1], params, sk.vk, now=0)
    n = extract_no_precompute(blk, reg[1], params, sk.vk, now=0)
    assert g.key_bytes == n.key_bytes == KEY
    assert n.mult_count / g.mult_count >= 0.5 * t


def test_t1_paths_cost_about_the_same(tiny, rng):
    sk = ProviderSigningKey.generate(tiny, rng)
    blk = assemble_block([5], [[ShareTuple(1, 5)]], 3, tiny, sk, r=4)
    a = recover_subkeys(blk, ShareTuple(2, 7, Owner.USER, 1), tiny)
    b = recover_subkeys(blk, ShareTuple(2, 7, Owner.USER, 1), tiny, precomputed=False)
    assert abs(a.mult_count - b.mult_count) <= 2


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2 ** 32), st.binary(min_size=1, max_size=40))
def test_path_equivalence_and_blind_identity(t, seed, key):
    params = generate_params(64, 2)
    rng = DeterministicRNG(seed)
    poly = generate_polynomial(params, t, rng)
    server, reg = generate_shares(poly, params, 3, t, rng)
    sk = ProviderSigningKey.generate(params, rng)
    r = 1 + rng.randrange(params.Q - 1)
    blk = build_block(key, server, poly.a0, params, sk, r=r)
    blind = pow(params.g, r * poly.a0 % params.Q, params.P)
    for share in reg.shares.values():
        a = extract(blk, share, params, sk.vk, now=0)
        b = extract_no_precompute(blk, share, params, sk.vk, now=0)
        assert a.key_bytes == b.key_bytes == key
        assert all(tr.blind % params.P == blind for tr in a.traces + b.traces)
