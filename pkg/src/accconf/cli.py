"""accconf command line: setup, build-block, revoke, extract, encrypt/decrypt, chunk, simulate, bench.

Exit codes: 0 ok, 2 usage, 3 crypto failure, 4 I/O or malformed input, 5 capacity/threshold.
"""

import argparse
import csv
import json
import os
import sys
import time

from . import block as blk
from .content import (ContentName, Numbering, chunk_object, decrypt_content, deserialize_encrypted,
                      encrypt_content, serialize_encrypted, write_chunks)
from .errors import CapacityError, ConfigError, CryptoError, FormatError, ThresholdError
from .extraction import extract, extract_no_precompute
from .group import deserialize_params, generate_params, serialize_params
from .rng import DeterministicRNG
from .shares import (SecretPolynomial, deserialize_share, deserialize_share_set, generate_polynomial,
                     generate_shares, serialize_share, serialize_share_set)
from .sim import SimConfig, load_config, simulate, write_reports
from .wire import atomic_write

EXIT_OK, EXIT_USAGE, EXIT_CRYPTO, EXIT_IO, EXIT_CAPACITY = 0, 2, 3, 4, 5

PARAMS_FILE = "params.bin"
SERVER_SHARES_FILE = "server_shares.bin"
VERIFY_KEY_FILE = "provider.pub"
SECRET_FILE = "server_secret.json"
REGISTRY_FILE = "registry.json"


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _write_json(path, obj):
    atomic_write(path, (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode())


def _seed(args):
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("ACCCONF_SEED", "0"))


def _user_file(uid):
    return os.path.join("users", f"user-{uid:06d}.share")


def cmd_setup(args):
    seed = _seed(args)
    params = generate_params(args.bits_q, seed)
    rng = DeterministicRNG(seed, "shares")
    poly = generate_polynomial(params, args.t, rng)
    server, registry = generate_shares(poly, params, args.n, args.t, rng, expiry=args.share_expiry)
    signer = blk.ProviderSigningKey.generate(params, DeterministicRNG(seed, "signing-key"))
    out = args.out_dir
    atomic_write(os.path.join(out, PARAMS_FILE), serialize_params(params))
    atomic_write(os.path.join(out, SERVER_SHARES_FILE), serialize_share_set(server))
    atomic_write(os.path.join(out, VERIFY_KEY_FILE), blk.serialize_verify_key(signer.vk))
    users = {}
    for uid, share in sorted(registry.shares.items()):
        atomic_write(os.path.join(out, _user_file(uid)), serialize_share(share))
        users[str(uid)] = _user_file(uid)
    _write_json(os.path.join(out, REGISTRY_FILE), {"n": args.n, "t": args.t, "users": users, "revoked": []})
    _write_json(os.path.join(out, SECRET_FILE), {
        "coeffs": [hex(c) for c in poly.coeffs],
        "signing_key": hex(signer.sk),
        "seed": seed,
        "block_version": 0,
        "key_hex": None,
        "timeout": 0,
    })
    print(f"wrote params, {args.t} server shares and {args.n} user shares to {out}")
    return EXIT_OK


def _load_server(directory):
    params = deserialize_params(_read(os.path.join(directory, PARAMS_FILE)))
    with open(os.path.join(directory, SECRET_FILE)) as fh:
        secret = json.load(fh)
    with open(os.path.join(directory, REGISTRY_FILE)) as fh:
        registry = json.load(fh)
    poly = SecretPolynomial(tuple(int(c, 16) for c in secret["coeffs"]), params.Q)
    sk = int(secret["signing_key"], 16)
    signer = blk.ProviderSigningKey(sk, pow(params.g, sk, params.P))
    slots = deserialize_share_set(_read(os.path.join(directory, SERVER_SHARES_FILE)))
    return params, poly, signer, slots, secret, registry


def _publish(directory, params, poly, signer, slots, secret, out, seed):
    version = secret["block_version"] + 1
    rng = DeterministicRNG(seed, f"block-v{version}")
    block = blk.build_block(bytes.fromhex(secret["key_hex"]), slots, poly.a0, params, signer,
                            secret["timeout"], rng, version)
    atomic_write(out, blk.serialize_block(block, params))
    secret["block_version"] = version
    _write_json(os.path.join(directory, SECRET_FILE), secret)
    return block


def cmd_build_block(args):
    params, poly, signer, slots, secret, _ = _load_server(args.dir)
    key = _read(args.key_file)
    if not key:
        raise ConfigError("key file is empty")
    secret["key_hex"] = key.hex()
    secret["timeout"] = args.timeout
    block = _publish(args.dir, params, poly, signer, slots, secret, args.out, _seed(args))
    print(f"block v{block.version}: m={block.m} t={block.t} -> {args.out}")
    return EXIT_OK


def cmd_revoke(args):
    params, poly, signer, slots, secret, registry = _load_server(args.dir)
    if secret["key_hex"] is None:
        raise ConfigError("build a block before revoking users")
    uid = str(args.user_id)
    if uid not in registry["users"]:
        raise ConfigError(f"user {uid} is not registered")
    if int(uid) in registry["revoked"]:
        raise ConfigError(f"user {uid} is already revoked")
    share = deserialize_share(_read(os.path.join(args.dir, registry["users"][uid])))
    state = blk.BlockState(params, poly, slots, signer, bytes.fromhex(secret["key_hex"]), secret["timeout"])
    state.revoked = [None] * len(registry["revoked"])
    state.version = secret["block_version"]
    block = blk.revoke_user(state, share, DeterministicRNG(_seed(args), f"block-v{state.version + 1}"))
    atomic_write(args.out, blk.serialize_block(block, params))
    atomic_write(os.path.join(args.dir, SERVER_SHARES_FILE), serialize_share_set(state.slots))
    registry["revoked"].append(int(uid))
    _write_json(os.path.join(args.dir, REGISTRY_FILE), registry)
    secret["block_version"] = block.version
    _write_json(os.path.join(args.dir, SECRET_FILE), secret)
    print(f"revoked user {uid}; block v{block.version} -> {args.out}")
    return EXIT_OK


def cmd_extract(args):
    params = deserialize_params(_read(args.params or os.path.join(args.dir, PARAMS_FILE)))
    vk = blk.deserialize_verify_key(_read(args.verify_key or os.path.join(args.dir, VERIFY_KEY_FILE)))
    block = blk.deserialize_block(_read(args.block), params, vk)
    share = deserialize_share(_read(args.share))
    fn = extract_no_precompute if args.no_precompute else extract
    now = time.time() if args.now is None else args.now
    result = fn(block, share, params, vk, now=now)
    atomic_write(args.out, result.key_bytes)
    print(f"recovered {len(result.key_bytes)}-byte key "
          f"({result.mult_count} Z_Q mults, {result.exp_count} Z_P exps)")
    return EXIT_OK


def cmd_encrypt(args):
    key = _read(args.key_file)
    nonce = bytes.fromhex(args.nonce) if args.nonce else DeterministicRNG(_seed(args), "nonce").randbytes(16)
    enc = encrypt_content(_read(args.input), key, nonce, args.name or "", args.key_id)
    atomic_write(args.out, serialize_encrypted(enc))
    return EXIT_OK


def cmd_decrypt(args):
    enc = deserialize_encrypted(_read(args.input))
    atomic_write(args.out, decrypt_content(enc, _read(args.key_file)))
    return EXIT_OK


def cmd_chunk(args):
    prefix = ContentName.parse(args.name)
    chunks = chunk_object(prefix, _read(args.input), args.chunk_size, Numbering(args.numbering), _seed(args))
    manifest = write_chunks(args.out_dir, chunks, args.numbering, args.key_id)
    print(f"{len(chunks)} chunks; manifest {manifest}")
    return EXIT_OK


def cmd_simulate(args):
    config, stacks = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    reports = simulate(config, stacks)
    write_reports(reports, args.out_dir)
    for r in reports:
        for w in r.warnings:
            print(f"warning: {w}", file=sys.stderr)
        print(f"{r.stack}: mean downloads {r.mean_downloads:.2f}, p50 latency {r.quantile(0.5) * 1e3:.3f} ms")
    return EXIT_OK


def bench_rows(t_list, bits_q, seed, n=2):
    """Per t: serialized block size and instrumented extraction costs for both paths."""
    params = generate_params(bits_q, seed)
    signer = blk.ProviderSigningKey.generate(params, DeterministicRNG(seed, "signing-key"))
    key = DeterministicRNG(seed, "bench-key").randbytes(16)
    rows = []
    for t in t_list:
        rng = DeterministicRNG(seed, f"bench-{t}")
        poly = generate_polynomial(params, t, rng)
        server, registry = generate_shares(poly, params, n, t, rng)
        block = blk.build_block(key, server, poly.a0, params, signer, rng=rng)
        share = registry[1]
        fast = extract(block, share, params, signer.vk, now=0)
        slow = extract_no_precompute(block, share, params, signer.vk, now=0)
        if fast.key_bytes != key or slow.key_bytes != key:
            raise CryptoError("benchmark extraction did not recover the key")
        rows.append({"t": t, "block_bytes": len(blk.serialize_block(block, params)),
                     "global_mults": fast.mult_count, "globalnp_mults": slow.mult_count,
                     "exps": fast.exp_count})
    return rows


def cmd_bench(args):
    t_list = [int(x) for x in args.t_list.split(",") if x.strip()]
    if not t_list or min(t_list) < 1:
        raise ConfigError("--t-list needs positive integers")
    rows = bench_rows(t_list, args.bits_q, _seed(args))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(out, ["t", "block_bytes", "global_mults", "globalnp_mults", "exps"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="accconf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("--seed", type=int, default=None, help="master seed (falls back to $ACCCONF_SEED)")
        return sp

    sp = add("setup", cmd_setup, "generate params, polynomial and shares")
    sp.add_argument("--bits-q", type=int, default=256)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--share-expiry", type=int, default=0, help="UNIX seconds, 0 = none")
    sp.add_argument("--out-dir", required=True)

    sp = add("build-block", cmd_build_block, "build and sign an enabling block")
    sp.add_argument("--dir", required=True, help="directory written by setup")
    sp.add_argument("--key-file", required=True)
    sp.add_argument("--timeout", type=int, default=0, help="UNIX seconds, 0 = never expires")
    sp.add_argument("--out", required=True)

    sp = add("revoke", cmd_revoke, "revoke a user and rebuild the block")
    sp.add_argument("--dir", required=True)
    sp.add_argument("--user-id", type=int, required=True)
    sp.add_argument("--out", required=True)

    sp = add("extract", cmd_extract, "recover the content key from a block and a share")
    sp.add_argument("--dir", default=".", help="setup directory holding params.bin and provider.pub")
    sp.add_argument("--params")
    sp.add_argument("--verify-key")
    sp.add_argument("--share", required=True)
    sp.add_argument("--block", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--now", type=float, default=None, help="clock for expiry checks (UNIX seconds)")
    sp.add_argument("--no-precompute", action="store_true", help="ignore the partial coefficients")

    sp = add("encrypt", cmd_encrypt, "encrypt a file under a key")
    sp.add_argument("--key-file", required=True)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--name", default="")
    sp.add_argument("--key-id", type=int, default=0)
    sp.add_argument("--nonce", help="hex nonce; derived from the seed when omitted")

    sp = add("decrypt", cmd_decrypt, "decrypt a file produced by encrypt")
    sp.add_argument("--key-file", required=True)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True)

    sp = add("chunk", cmd_chunk, "split a file into named chunks on disk")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--name", required=True, help="/provider/type/category/title/V<k>")
    sp.add_argument("--chunk-size", type=int, default=1436)
    sp.add_argument("--numbering", choices=[m.value for m in Numbering], default="sequential")
    sp.add_argument("--key-id", type=int, default=0)
    sp.add_argument("--out-dir", required=True)

    sp = add("simulate", cmd_simulate, "run the cache simulator from a JSON config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out-dir", required=True)

    sp = add("bench", cmd_bench, "block size and extraction cost per threshold")
    sp.add_argument("--t-list", required=True, help="comma-separated thresholds")
    sp.add_argument("--bits-q", type=int, default=64)
    sp.add_argument("--out")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CryptoError as exc:
        kind = type(exc).__name__.replace("Error", "").lower()
        if kind == "revokedshare":
            kind = "revoked"
        print(f"error: {kind}: {exc}", file=sys.stderr)
        return EXIT_CRYPTO
    except (CapacityError, ThresholdError) as exc:
        print(f"error: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (FormatError, OSError) as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
