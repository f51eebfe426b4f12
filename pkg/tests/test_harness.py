"""Harness and CLI behavior: determinism, schemas, gates, exit codes."""

import numpy as np
import pytest

from vblast.cli import main
from vblast.errors import ContractViolationError
from vblast.harness import (
    BER_HEADER,
    EQUIV_HEADER,
    FLOPS_HEADER,
    MEM_HEADER,
    SweepConfig,
    ber_trial,
    equiv_trial,
    run_ber,
    run_equiv,
    run_flops,
    run_mem,
    write_csv,
)


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_sweepconfig_validation():
    with pytest.raises(ContractViolationError):
        SweepConfig(trials=0)
    with pytest.raises(ContractViolationError):
        SweepConfig(m_list=[0])
    with pytest.raises(ContractViolationError):
        SweepConfig(algorithms=["nope"])
    with pytest.raises(ContractViolationError):
        SweepConfig(m_list=[2, 4], n_list=[4])


def test_equiv_small_grid_passes():
    cfg = SweepConfig(m_list=[2], snr_db_list=[20.0], trials=100, seed=1)
    rows, failures = run_equiv(cfg)
    assert failures == []
    assert len(rows) == 100 * 9
    # rows sorted by (M, snr, algorithm, trial); columns per schema
    assert len(rows[0]) == len(EQUIV_HEADER)


def test_equiv_degenerate_single_stream():
    cfg = SweepConfig(m_list=[1], snr_db_list=[10.0], trials=20, seed=1)
    rows, failures = run_equiv(cfg)
    assert failures == []
    assert all(r[5] == 1 for r in rows)      # hard_match column


def test_equiv_csv_deterministic(tmp_path):
    cfg = SweepConfig(m_list=[2], snr_db_list=[10.0], trials=25, seed=3)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    rows1, _ = run_equiv(cfg)
    rows2, _ = run_equiv(cfg)
    write_csv(p1, EQUIV_HEADER, rows1)
    write_csv(p2, EQUIV_HEADER, rows2)
    assert read_bytes(p1) == read_bytes(p2)
    assert b"\r\n" not in read_bytes(p1)


def test_equiv_bytes_identical_with_worker_pool(tmp_path, monkeypatch):
    cfg = SweepConfig(m_list=[2], snr_db_list=[10.0], trials=12, seed=5)
    rows_serial, _ = run_equiv(cfg)
    monkeypatch.setenv("VBLAST_WORKERS", "3")
    rows_pooled, _ = run_equiv(cfg)
    assert rows_serial == rows_pooled


def test_flops_rows_and_ratios():
    cfg = SweepConfig(m_list=[8], trials=1, seed=1)
    rows, ratios = run_flops(cfg)
    assert len(rows) == 9
    assert len(rows[0]) == len(FLOPS_HEADER)
    labels = {r[2] for r in ratios}
    assert {"speed_adv/proposed_2", "mem_saving/proposed_2",
            "fastest_known/speed_adv", "init_i/init_v"} <= labels


def test_flops_tiny_at_single_stream():
    cfg = SweepConfig(m_list=[1], trials=1)
    rows, _ = run_flops(cfg)
    for row in rows:
        assert row[3] <= 10 and row[5] <= 3    # cmul, cdiv all tiny


def test_flops_gap_non_increasing_endpoints():
    cfg = SweepConfig(algorithms=["proposed_2", "speed_adv"], m_list=[8, 16, 32, 64], trials=1)
    rows, _ = run_flops(cfg)
    for algo in ("proposed_2", "speed_adv"):
        gaps = [r[7] for r in rows if r[2] == algo]
        assert gaps[-1] < gaps[0]


def test_mem_rows_and_gate():
    cfg = SweepConfig(m_list=[16], trials=1)
    rows, failures = run_mem(cfg)
    assert failures == []
    assert len(rows[0]) == len(MEM_HEADER)
    peaks = {r[2]: r[3] for r in rows}
    assert peaks["proposed_2"] < peaks["speed_adv"]
    assert peaks["proposed_2"] <= 0.55 * peaks["mem_saving"]


def test_mem_single_stream_no_assertion():
    cfg = SweepConfig(m_list=[1], trials=1)
    rows, failures = run_mem(cfg)
    assert failures == []


def test_ber_noiseless_is_zero():
    cfg = SweepConfig(algorithms=["proposed_2", "original"], m_list=[4],
                      snr_db_list=[float("inf")], trials=50, seed=2)
    rows = run_ber(cfg)
    assert all(r[4] == 0 and r[6] == 0.0 for r in rows)


def test_ber_identical_across_algorithms_on_gated_trials():
    names = ["speed_adv", "proposed_2", "mem_saving"]
    checked = 0
    for trial in range(40):
        errors, gated, _bits = ber_trial((4, 4, 8.0, 9, trial, False, names, "qpsk"))
        if gated:
            assert len(set(errors.values())) == 1
            checked += 1
    assert checked > 30


def test_ber_monotone_in_snr():
    cfg = SweepConfig(algorithms=["proposed_2"], m_list=[4],
                      snr_db_list=[10.0, 25.0], trials=10_000, seed=4)
    rows = run_ber(cfg)
    ber = {r[2]: r[6] for r in rows}
    assert ber[25.0] < ber[10.0]
    assert rows[0][5] == 10_000 * 4 * 2       # bits column


def test_cli_equiv_roundtrip(tmp_path, capsys):
    out = tmp_path / "equiv.csv"
    code = main(["equiv", "--m", "2", "--snr-db", "20", "--trials", "20",
                 "--seed", "1", "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(EQUIV_HEADER)
    assert len(text.splitlines()) == 1 + 20 * 9


def test_cli_flops_ratio_file_carries_headline_values(tmp_path):
    out = tmp_path / "flops.csv"
    code = main(["flops", "--m", "64", "--algo", "speed_adv,proposed_2,mem_saving,fastest_known",
                 "--out", str(out)])
    assert code == 0
    assert out.exists()
    lines = (tmp_path / "flops.ratios.csv").read_text().splitlines()[1:]
    ratios = {row.split(",")[2]: float(row.split(",")[3]) for row in lines}
    assert ratios["speed_adv/proposed_2"] == pytest.approx(1.30, abs=0.08)
    assert ratios["mem_saving/proposed_2"] == pytest.approx(1.86, abs=0.12)
    assert ratios["fastest_known/speed_adv"] == pytest.approx(1.22, abs=0.08)
    assert ratios["init_i/init_v"] == pytest.approx(1.67, abs=0.10)


def test_cli_mem_and_ber(tmp_path):
    assert main(["mem", "--m", "16", "--out", str(tmp_path / "m.csv")]) == 0
    assert main(["ber", "--m", "2", "--algo", "proposed_2", "--trials", "10",
                 "--snr-db", "15", "--out", str(tmp_path / "b.csv")]) == 0
    header = (tmp_path / "b.csv").read_text().splitlines()[0]
    assert header == ",".join(BER_HEADER)


def test_cli_rejects_zero_trials(tmp_path):
    code = main(["equiv", "--m", "2", "--trials", "0", "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_cli_rejects_unknown_algorithm(tmp_path):
    with pytest.raises(SystemExit):
        main(["flops", "--algo", "bogus", "--m", "2", "--out", str(tmp_path / "x.csv")])


def test_float_formatting_12_digits(tmp_path):
    p = tmp_path / "f.csv"
    write_csv(p, ["v"], [(0.1234567890123456789,)])
    assert p.read_text().splitlines()[1] == "0.123456789012"


def test_singularity_recorded_not_raised(monkeypatch):
    import vblast.detectors as det
    from vblast.errors import SingularMatrixError

    def boom(*a, **kw):
        raise SingularMatrixError("injected singular pivot")

    monkeypatch.setitem(det.ALGORITHMS, "speed_adv", boom)
    cfg = SweepConfig(algorithms=["speed_adv", "proposed_2"], m_list=[2],
                      snr_db_list=[15.0], trials=3, seed=1)
    rows, failures = run_equiv(cfg)
    assert len(rows) == 6                     # a row per detector per trial
    assert any("injected singular pivot" in f for f in failures)
    assert all("proposed_2" not in f for f in failures)
