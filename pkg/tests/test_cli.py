import json

import pytest

from nimsa.bench import EXIT_CONFIG_ERROR, EXIT_OK, main


def run(args):
    return main(args)


def read(path):
    return path.read_bytes()


def test_selftest_exit_code():
    assert run(["selftest"]) == EXIT_OK


def test_auth_bench_csv_schema(tmp_path):
    out = tmp_path / "auth.csv"
    assert run([
        "auth-bench", "--trials", "1", "--loss", "0", "--delay-sweep", "10:20:10",
        "--out", str(out), "--seed", "3",
    ]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "scheme,loss_pct,one_way_delay_ms,trial,auth_latency_ms"
    assert len(lines) == 1 + 2 * 2  # two schemes, two delays, one trial
    assert lines[1].startswith("nimsa,0.000000,10.000000,0,")


def test_auth_bench_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["auth-bench", "--trials", "2", "--loss", "5", "--delay-sweep",
            "50:50:10", "--seed", "11"]
    assert run(args + ["--out", str(a)]) == EXIT_OK
    assert run(args + ["--out", str(b)]) == EXIT_OK
    assert read(a) == read(b)
    c = tmp_path / "c.csv"
    assert run(["auth-bench", "--trials", "2", "--loss", "5", "--delay-sweep",
                "50:50:10", "--seed", "12", "--out", str(c)]) == EXIT_OK
    assert read(a) != read(c)  # the seed is live


def test_handover_bench_csv_schema(tmp_path):
    out = tmp_path / "ho.csv"
    assert run([
        "handover-bench", "--trials", "1", "--loss", "0", "--out", str(out),
    ]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "scheme,mode,loss_pct,trial,handover_latency_ms"
    modes = [ln.split(",")[1] for ln in lines[1:]]
    assert modes == ["transmission", "notification", "mobike"]


def test_handover_bench_single_mode(tmp_path):
    out = tmp_path / "ho.csv"
    assert run([
        "handover-bench", "--mode", "mobike", "--trials", "1", "--loss", "0",
        "--out", str(out),
    ]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert all(ln.split(",")[0] == "ikev2" for ln in lines[1:])


def test_latency_bench_csv_schema(tmp_path):
    out = tmp_path / "lat.csv"
    assert run([
        "latency-bench", "--duration", "5", "--out", str(out), "--seed", "2",
    ]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "scheme,probe_seq,owd_ms"
    schemes = {ln.split(",")[0] for ln in lines[1:]}
    assert schemes == {"none", "nimsa", "ikev2"}


def test_throughput_bench_csv_schema(tmp_path):
    out = tmp_path / "tp.csv"
    assert run([
        "throughput-bench", "--duration", "3", "--out", str(out), "--seed", "2",
    ]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "scheme,time_s,goodput_mbps"
    schemes = {ln.split(",")[0] for ln in lines[1:]}
    assert schemes == {"nimsa", "nimsa_efficiency", "ikev2", "ikev2_efficiency"}


def test_config_file_overrides(tmp_path):
    cfg = tmp_path / "scenario.json"
    cfg.write_text(json.dumps({"crypto_costs": {"pairing_ms": 0.0, "hmac_ms": 0.0}}))
    out = tmp_path / "auth.csv"
    assert run([
        "auth-bench", "--trials", "1", "--loss", "0", "--delay-sweep", "50:50:10",
        "--scheme", "nimsa", "--out", str(out), "--config", str(cfg),
    ]) == EXIT_OK
    value = float(out.read_text().splitlines()[1].split(",")[-1])
    assert value == pytest.approx(52.634, abs=1e-6)  # no crypto charge left


def test_bad_config_exits_2(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"crypto_costs": {"bogus_field": 1}}))
    out = tmp_path / "x.csv"
    assert run([
        "auth-bench", "--trials", "1", "--loss", "0", "--delay-sweep", "50:50:10",
        "--out", str(out), "--config", str(cfg),
    ]) == EXIT_CONFIG_ERROR
    cfg.write_text("{not json")
    assert run([
        "auth-bench", "--trials", "1", "--loss", "0", "--delay-sweep", "50:50:10",
        "--out", str(out), "--config", str(cfg),
    ]) == EXIT_CONFIG_ERROR


def test_bad_sweep_and_loss_exit_2(tmp_path):
    out = tmp_path / "x.csv"
    assert run(["auth-bench", "--delay-sweep", "banana", "--out", str(out)]) == EXIT_CONFIG_ERROR
    assert run(["auth-bench", "--loss", "0,150", "--out", str(out)]) == EXIT_CONFIG_ERROR
    assert run(["latency-bench", "--links", "mystery", "--out", str(out)]) == EXIT_CONFIG_ERROR
