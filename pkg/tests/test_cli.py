import csv
import io
import json
import os

import pytest

from accconf.cli import EXIT_CAPACITY, EXIT_CRYPTO, EXIT_IO, EXIT_OK, EXIT_USAGE, main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def setup_dir(tmp_path):
    d = tmp_path / "srv"
    assert run("setup", "--bits-q", 64, "--t", 3, "--n", 6, "--seed", 5, "--out-dir", d) == EXIT_OK
    key = tmp_path / "content.key"
    key.write_bytes(bytes(range(16)))
    assert run("build-block", "--dir", d, "--key-file", key, "--out", tmp_path / "b1.bin", "--seed", 5) == EXIT_OK
    return d, key


def user_share(d, uid):
    return d / "users" / f"user-{uid:06d}.share"


def test_setup_writes_expected_files(setup_dir):
    d, _ = setup_dir
    for name in ("params.bin", "server_shares.bin", "provider.pub", "server_secret.json", "registry.json"):
        assert (d / name).exists()
    assert len(os.listdir(d / "users")) == 6
    reg = json.loads((d / "registry.json").read_text())
    assert reg["n"] == 6 and reg["t"] == 3 and reg["revoked"] == []


def test_full_pipeline(setup_dir, tmp_path):
    d, key = setup_dir
    plain = tmp_path / "movie.bin"
    plain.write_bytes(os.urandom(5000))
    assert run("encrypt", "--key-file", key, "--in", plain, "--out", tmp_path / "c.bin",
               "--name", "/prov/video/g/title/V1") == EXIT_OK
    assert run("extract", "--dir", d, "--share", user_share(d, 4), "--block", tmp_path / "b1.bin",
               "--out", tmp_path / "k.bin") == EXIT_OK
    assert (tmp_path / "k.bin").read_bytes() == key.read_bytes()
    assert run("decrypt", "--key-file", tmp_path / "k.bin", "--in", tmp_path / "c.bin",
               "--out", tmp_path / "out.bin") == EXIT_OK
    assert (tmp_path / "out.bin").read_bytes() == plain.read_bytes()


def test_no_precompute_path_agrees(setup_dir, tmp_path):
    d, key = setup_dir
    assert run("extract", "--dir", d, "--share", user_share(d, 1), "--block", tmp_path / "b1.bin",
               "--out", tmp_path / "k.bin", "--no-precompute") == EXIT_OK
    assert (tmp_path / "k.bin").read_bytes() == key.read_bytes()


def test_revoked_user_gets_crypto_exit(setup_dir, tmp_path, capsys):
    d, key = setup_dir
    assert run("revoke", "--dir", d, "--user-id", 2, "--out", tmp_path / "b2.bin") == EXIT_OK
    capsys.readouterr()
    rc = run("extract", "--dir", d, "--share", user_share(d, 2), "--block", tmp_path / "b2.bin",
             "--out", tmp_path / "k.bin")
    assert rc == EXIT_CRYPTO
    assert "revoked" in capsys.readouterr().err
    assert not (tmp_path / "k.bin").exists()
    assert run("extract", "--dir", d, "--share", user_share(d, 3), "--block", tmp_path / "b2.bin",
               "--out", tmp_path / "k.bin") == EXIT_OK
    assert (tmp_path / "k.bin").read_bytes() == key.read_bytes()


def test_revocations_beyond_threshold(setup_dir, tmp_path):
    d, _ = setup_dir
    for uid in (1, 2, 3):
        assert run("revoke", "--dir", d, "--user-id", uid, "--out", tmp_path / f"r{uid}.bin") == EXIT_OK
    assert run("revoke", "--dir", d, "--user-id", 4, "--out", tmp_path / "r4.bin") == EXIT_CAPACITY
    assert run("revoke", "--dir", d, "--user-id", 1, "--out", tmp_path / "again.bin") == EXIT_USAGE


def test_tampered_block_rejected(setup_dir, tmp_path, capsys):
    d, _ = setup_dir
    raw = bytearray((tmp_path / "b1.bin").read_bytes())
    raw[40] ^= 1
    (tmp_path / "bad.bin").write_bytes(bytes(raw))
    rc = run("extract", "--dir", d, "--share", user_share(d, 1), "--block", tmp_path / "bad.bin",
             "--out", tmp_path / "k.bin")
    assert rc in (EXIT_CRYPTO, EXIT_IO)
    assert capsys.readouterr().err.startswith("error:")


def test_expired_block(tmp_path, setup_dir):
    d, key = setup_dir
    assert run("build-block", "--dir", d, "--key-file", key, "--timeout", 1000, "--out", tmp_path / "b.bin") == 0
    args = ["extract", "--dir", d, "--share", user_share(d, 1), "--block", tmp_path / "b.bin",
            "--out", tmp_path / "k.bin"]
    assert run(*args, "--now", 999) == EXIT_OK
    assert run(*args, "--now", 1001) == EXIT_CRYPTO


def test_missing_file_is_io_error(tmp_path):
    assert run("decrypt", "--key-file", tmp_path / "nope", "--in", tmp_path / "x", "--out", tmp_path / "y") == EXIT_IO


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run("setup", "--t", 3)
    assert exc.value.code == EXIT_USAGE
    assert run("bench", "--t-list", "0,3") == EXIT_USAGE


def test_capacity_error_on_setup(tmp_path):
    assert run("setup", "--bits-q", 8, "--t", 5, "--n", 500, "--out-dir", tmp_path / "s") == EXIT_CAPACITY


def test_setup_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert run("setup", "--bits-q", 64, "--t", 2, "--n", 3, "--seed", 9, "--out-dir", tmp_path / name) == 0
    for f in ("params.bin", "server_shares.bin", "provider.pub", "users/user-000001.share"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_seed_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("ACCCONF_SEED", "9")
    assert run("setup", "--bits-q", 64, "--t", 2, "--n", 3, "--out-dir", tmp_path / "env") == 0
    assert run("setup", "--bits-q", 64, "--t", 2, "--n", 3, "--seed", 9, "--out-dir", tmp_path / "arg") == 0
    assert (tmp_path / "env" / "params.bin").read_bytes() == (tmp_path / "arg" / "params.bin").read_bytes()


def test_bench_csv(tmp_path, capsys):
    assert run("bench", "--t-list", "2,4,8", "--bits-q", 64) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [int(r["t"]) for r in rows] == [2, 4, 8]
    for r in rows:
        t = int(r["t"])
        assert int(r["global_mults"]) < int(r["globalnp_mults"])
        assert int(r["exps"]) == t + 1
    sizes = [int(r["block_bytes"]) for r in rows]
    assert sizes[1] - sizes[0] == (sizes[2] - sizes[1]) // 2


def test_chunk_command(tmp_path):
    src = tmp_path / "obj.bin"
    src.write_bytes(os.urandom(4000))
    assert run("chunk", "--in", src, "--name", "/p/video/g/t/V1", "--out-dir", tmp_path / "ch") == EXIT_OK
    files = os.listdir(tmp_path / "ch")
    assert sum(f.endswith(".manifest.json") for f in files) == 1
    assert len(files) == 4


def test_simulate_command(tmp_path):
    cfg = {
        "topology": {"n_as": 2, "routers_per_as": 4, "edge_router_count": 1, "clients_per_edge": 2,
                     "provider_hops": [1, 8]},
        "workload": {"n_objects": 5, "object_bytes": 20_000},
        "duration": 2.0,
        "eb_bytes": 2_000,
        "stacks": ["accconf", "ndn", "udp"],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run("simulate", "--config", path, "--out-dir", tmp_path / "out") == EXIT_OK
    summary = list(csv.DictReader(open(tmp_path / "out" / "summary.csv")))
    assert [r["stack"] for r in summary] == ["accconf", "ndn", "udp"]
    assert (tmp_path / "out" / "ndn_latency_samples.csv").exists()


def test_simulate_bad_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"durration": 3}))
    assert run("simulate", "--config", path, "--out-dir", tmp_path / "out") == EXIT_USAGE
