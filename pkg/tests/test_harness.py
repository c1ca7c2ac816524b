import json

import numpy as np
import pytest

from anytime_codes.channel import ChannelModel
from anytime_codes.code import CodeParams, sample_tz
from anytime_codes.harness import (
    COMMANDS,
    EXIT_BUDGET,
    EXIT_CERT_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    delay_histograms,
    fit_exponent,
    main,
)

SMALL = {
    "sample-code": {"n": 6, "k": 2, "T": 10},
    "certify": {"n": 6, "k": 2, "alpha": 0.05, "theta": 1.0, "d_o": 1, "d_max": 3},
    "exponent": {"n": 6, "k": 2, "epsilon": 0.2, "T": 40, "trials": 4, "alpha": 0.05, "theta": 1.0, "d_max": 3, "resamples": 50},
    "thresholds": {"channel": "bsc", "epsilon": 0.05},
    "region": {"channel": "both", "n": 6, "m": 2, "npoints": 8},
    "stabilize": {"lambda": 2, "W": 60, "V": 2, "delta": 2, "n": 15, "epsilon": 0.3, "T": 30},
    "perf-curve": {"lambda": 2, "W": 60, "V": 2, "n": 15, "epsilon": 0.3, "T": 20, "k_values": [3, 6], "trials": 3},
    "decode-sim": {"n": 6, "k": 2, "epsilon": 0.3, "T": 30},
    "random-walk": {"lambda": 1.2, "n": 3, "epsilon": 0.2, "T": 50},
}


def run(tmp_path, command, cfg, *extra, out="out"):
    path = tmp_path / f"{command}.json"
    path.write_text(json.dumps(cfg))
    return main([command, "--config", str(path), "--out", str(tmp_path / out), *extra])


def read_outputs(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_every_command_has_a_small_config():
    assert set(SMALL) == set(COMMANDS)


@pytest.mark.parametrize("command", sorted(SMALL))
def test_reruns_are_byte_identical(tmp_path, command):
    cfg = dict(SMALL[command], seed=7)
    assert run(tmp_path, command, cfg, out="a") == EXIT_OK
    assert run(tmp_path, command, cfg, out="b") == EXIT_OK
    first, second = read_outputs(tmp_path / "a"), read_outputs(tmp_path / "b")
    assert first and first == second
    for name, data in first.items():
        if name.endswith(".csv"):
            lines = data.decode().splitlines()
            assert lines[0].startswith("# tool: anytime-codes")
            assert any(line.startswith("# config: ") for line in lines)


def test_seed_changes_output(tmp_path):
    cfg = SMALL["decode-sim"]
    run(tmp_path, "decode-sim", dict(cfg, seed=1), out="a")
    run(tmp_path, "decode-sim", dict(cfg, seed=2), out="b")
    assert read_outputs(tmp_path / "a") != read_outputs(tmp_path / "b")


def test_flags_override_config(tmp_path):
    cfg = dict(SMALL["decode-sim"], seed=1)
    run(tmp_path, "decode-sim", cfg, "--seed", "2", out="a")
    run(tmp_path, "decode-sim", dict(cfg, seed=2), out="b")
    assert read_outputs(tmp_path / "a") == read_outputs(tmp_path / "b")


def test_usage_errors(tmp_path, capsys):
    assert run(tmp_path, "decode-sim", SMALL["decode-sim"]) == EXIT_USAGE
    assert "seed" in capsys.readouterr().err
    missing = {k: v for k, v in SMALL["decode-sim"].items() if k != "n"}
    assert run(tmp_path, "decode-sim", dict(missing, seed=1)) == EXIT_USAGE
    assert "'n'" in capsys.readouterr().err
    assert run(tmp_path, "sample-code", {"n": 3, "k": 3, "T": 4, "seed": 1}) == EXIT_USAGE
    assert run(tmp_path, "decode-sim", dict(SMALL["decode-sim"], seed=1, epsilon=1.5)) == EXIT_USAGE
    assert run(tmp_path, "stabilize", dict(SMALL["stabilize"], seed=1, channel="bsc", epsilon=0.1)) == EXIT_USAGE
    assert run(tmp_path, "decode-sim", dict(SMALL["decode-sim"], seed=-1)) == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert main(["thresholds", "--config", str(bad), "--seed", "1"]) == EXIT_USAGE


def test_certify_exit_codes(tmp_path):
    base = dict(SMALL["certify"], n=15, k=6, seed=1)
    assert run(tmp_path, "certify", dict(base, alpha=0.15, theta=1.2), out="pass") == EXIT_OK
    assert run(tmp_path, "certify", dict(base, alpha=0.9), out="fail") == EXIT_CERT_FAILED
    report = json.loads((tmp_path / "fail" / "certificate.json").read_text())
    assert not report["certificate"]["pass"] and report["certificate"]["violations"]
    assert run(tmp_path, "certify", dict(base, d_max=5), out="budget") == EXIT_BUDGET


def test_exponent_without_certified_code(tmp_path):
    cfg = dict(SMALL["exponent"], seed=1, alpha=0.99, max_attempts=3)
    assert run(tmp_path, "exponent", cfg) == EXIT_CERT_FAILED


def test_code_file_round_trip(tmp_path):
    assert run(tmp_path, "sample-code", dict(SMALL["sample-code"], seed=3), out="code") == EXIT_OK
    code = str(tmp_path / "code" / "code.json")
    cfg = {"code": code, "epsilon": 0.3, "T": 10, "seed": 1}
    assert run(tmp_path, "decode-sim", cfg, out="a") == EXIT_OK
    assert run(tmp_path, "decode-sim", dict(cfg, T=11), out="b") == EXIT_USAGE


def test_histograms_without_erasures():
    h = sample_tz(CodeParams(6, 2, 30), 0.5, 1)
    hist = delay_histograms(h, ChannelModel.bec(0.0), 30, 3, 0)
    assert hist.shape == (3, 1) and hist.sum() == 90
    with pytest.raises(ValueError):
        delay_histograms(h, ChannelModel.bec(0.1), 30, 0, 0)


def test_fit_exponent_on_exact_geometric_counts():
    # counts 4096 * 2^-d in every trial give a slope of exactly -1
    row = np.array([8192] + [4096 >> d for d in range(1, 9)])
    fit = fit_exponent(np.tile(row, (5, 1)), min_count=10, resamples=50, seed=0)
    assert fit.slope == pytest.approx(-1.0)
    assert fit.ci_low <= fit.slope <= fit.ci_high
    assert list(fit.delays) == list(range(1, 9))
