import csv

import pytest

from ntnmc.cli import main, parse_policies, parse_seeds
from ntnmc.campaign import run_campaign
from ntnmc.config import load_config

TINY_CFG = """
sim_duration_s = 0.6
warmup_s = 0.3
n_ue_per_sector = 2
"""


def test_parse_seeds_forms():
    assert parse_seeds("1..3") == [1, 2, 3]
    assert parse_seeds("5") == [5]
    assert parse_seeds("1,2,9") == [1, 2, 9]
    assert parse_seeds(" 4..4 ") == [4]
    with pytest.raises(ValueError):
        parse_seeds("5..2")


def test_parse_policies_validates_names():
    assert parse_policies("mcs,off") == ["mcs", "off"]
    with pytest.raises(ValueError):
        parse_policies("mcs,bogus")
    with pytest.raises(ValueError):
        parse_policies(" , ")


def test_validate_prints_effective_config(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("SIM_POLICY", raising=False)
    p = tmp_path / "run.cfg"
    p.write_text("isd_m = 5000\n")
    assert main(["validate", "--config", str(p)]) == 0
    out = capsys.readouterr().out
    assert "policy = mcs" in out
    assert "isd_m = 5000.0" in out


def test_table_dump_lists_all_entries(capsys):
    assert main(["table-dump"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == "mcs,min_sinr_db,efficiency_bits_per_re"
    assert lines[1] == "0,-9.50,0.0586"
    assert lines[32] == "31,21.50,7.4063"
    assert "noise_per_re_dbm_nf7,-125.2391" in out
    assert "fspl_600km_2ghz_db,154.0336" in out


def test_run_writes_artifacts_matching_library_results(tmp_path, capsys,
                                                       monkeypatch):
    monkeypatch.delenv("SIM_POLICY", raising=False)
    cfg_path = tmp_path / "tiny.cfg"
    cfg_path.write_text(TINY_CFG)
    out = tmp_path / "res"
    rc = main(["run", "--config", str(cfg_path), "--out", str(out),
               "--policies", "off,mcs", "--seeds", "3"])
    assert rc == 0
    printed = capsys.readouterr().out
    assert "wrote artifacts to" in printed

    with open(out / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["setting"] for r in rows] == ["off", "mcs"]
    assert (out / "cdf_off.csv").exists()
    assert (out / "cdf_mcs.csv").exists()
    assert (out / "events_mcs_3.csv").exists()
    assert (out / "manifest.json").exists()

    cfg = load_config(str(cfg_path), environ={})
    summaries, _ = run_campaign(cfg, ["off", "mcs"], [3])
    for row, s in zip(rows, summaries):
        assert float(row["mean_kbps"]) == pytest.approx(s.mean_kbps, abs=5e-7)
        assert float(row["p5_kbps"]) == pytest.approx(s.p5_kbps, abs=5e-7)


def test_bad_policy_is_usage_error(tmp_path):
    assert main(["run", "--out", str(tmp_path / "x"),
                 "--policies", "bogus", "--seeds", "1"]) == 2


def test_bad_config_file_is_usage_error(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("not_a_knob = 1\n")
    assert main(["run", "--config", str(p), "--out", str(tmp_path / "x"),
                 "--seeds", "1"]) == 2


def test_bad_jobs_is_usage_error(tmp_path):
    assert main(["run", "--out", str(tmp_path / "x"), "--seeds", "1",
                 "--jobs", "0"]) == 2


def test_unwritable_out_dir_fails_before_any_run(tmp_path):
    blocker = tmp_path / "occupied"
    blocker.write_text("x")
    rc = main(["run", "--out", str(blocker / "sub"), "--seeds", "1"])
    assert rc == 1
