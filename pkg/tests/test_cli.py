import csv
import json

import pytest

from sdsync import cli
from sdsync.formats import read_bits, read_envelope, read_waveform


def test_generate_writes_frame_and_tag_signals(tmp_path, capsys):
    out = tmp_path / "gen"
    code = cli.main(["generate", "--nid2", "1", "--duration", "0.005", "--fft-size", "256", "--snr", "10",
                     "--tag-rate", "1.92e6", "--out", str(out), "--seed", "3"])
    assert code == 0
    wave = read_waveform(out / "frame.pssw")
    assert len(wave) == 38_400
    assert len(read_envelope(out / "envelope.pssw")) == len(read_bits(out / "bits.pssw")) == 9_600
    assert (out / "envelope.csv").exists() and (out / "bits.csv").exists()
    assert "wrote" in capsys.readouterr().out


def test_generate_json_and_determinism(tmp_path):
    for name in ("a", "b"):
        assert cli.main(["generate", "--duration", "0.005", "--fft-size", "128", "--tag-rate", "1e6",
                         "--format", "json", "--out", str(tmp_path / name)]) == 0
    a = (tmp_path / "a" / "tag_signals.json").read_bytes()
    assert a == (tmp_path / "b" / "tag_signals.json").read_bytes()
    assert set(json.loads(a)) == {"sample_rate_hz", "envelope", "bits", "true_pss_centers"}


def _config(tmp_path, **kw):
    cfg = {"methods": ["SD", "SD_Q"], "nid2_values": [0], "tag_rates_hz": [5e6], "trials_per_point": 2,
           "frame_duration_s": 0.005, "rng_seed": 1, **kw}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_sweep(tmp_path, capsys):
    out = tmp_path / "res"
    assert cli.main(["run", "--config", str(_config(tmp_path)), "--out", str(out)]) == 0
    with open(out / "records.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 2 and (out / "summary.csv").exists()
    assert "SD_Q" in capsys.readouterr().out


def test_run_seed_override_changes_records(tmp_path):
    cfg = _config(tmp_path)
    cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "5"])
    cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "6"])
    assert (tmp_path / "a" / "records.csv").read_bytes() != (tmp_path / "b" / "records.csv").read_bytes()


@pytest.mark.parametrize("body", ["{not json", "[1, 2]", '{"methods": []}', '{"unknown_key": 1}',
                                  '{"methods": ["SD"], "trials_per_point": 0}'])
def test_run_config_errors_exit_2(tmp_path, body, capsys):
    path = tmp_path / "bad.json"
    path.write_text(body)
    assert cli.main(["run", "--config", str(path)]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_config_file_exits_3(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "missing.json")]) == 3


def test_unwritable_output_exits_3(tmp_path):
    blocker = tmp_path / "f"
    blocker.write_text("x")
    assert cli.main(["run", "--config", str(_config(tmp_path)), "--out", str(blocker / "sub")]) == 3


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["ber", "--trials", "many"], ["generate", "--nid2", "5"]])
def test_bad_arguments_exit_2(argv):
    assert cli.main(argv) == 2


def test_help_exits_0(capsys):
    assert cli.main(["--help"]) == 0


def test_report_resources(tmp_path):
    assert cli.main(["report-resources", "--out", str(tmp_path), "--quantized-rate", "5"]) == 0
    with open(tmp_path / "resources.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 12 + 4
    sd = next(r for r in rows if r["method"] == "SD" and float(r["rate_hz"]) == 7.68e6)
    assert int(sd["d_flip_flops"]) == 6_375
    assert {r["method"] for r in rows if r["erratum"] == "True"} == {"NFT"}


def test_report_resources_json_to_stdout(capsys):
    assert cli.main(["report-resources", "--format", "json", "--rates", "3.84"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["method"] for r in rows] == ["NFT", "SST", "SA", "SD"]


def test_ber_offsets(tmp_path):
    assert cli.main(["ber", "--modulations", "BPSK,16PSK", "--offsets", "0:6:3", "--trials", "20",
                     "--out", str(tmp_path)]) == 0
    with open(tmp_path / "ber.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["timing_offset_us"]) for r in rows] == [0, 3, 6, 0, 3, 6]


def test_ber_with_sync(tmp_path):
    assert cli.main(["ber", "--with-sync", "--snr", "15", "--trials", "6", "--format", "json",
                     "--out", str(tmp_path)]) == 0
    rows = json.loads((tmp_path / "ber.json").read_text())
    assert [r["synchronized"] for r in rows] == [True, False]


@pytest.mark.parametrize("argv", [["ber", "--modulations", "8QAM"], ["ber", "--offsets", "0:3:0"],
                                  ["ber", "--offsets", "a,b"], ["ber", "--offsets", "-3"]])
def test_ber_argument_errors_exit_2(argv):
    assert cli.main(argv + ["--trials", "2"]) == 2
