import json

import numpy as np
import pytest

from fdastap.cli import main

SMALL_SPECTRUM = """
[scene]
n_ambiguities = 2
n_patches = 41
[run]
n_samples = 300
[spectrum]
n_f_T = 12
n_f_R = 13
n_f_d = 5
"""


def write(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_spectrum_outputs_are_reproducible(tmp_path, capsys):
    cfg = write(tmp_path, SMALL_SPECTRUM)
    assert main(["spectrum", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["spectrum", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "manifest.json" in files
    for name in files:
        if name.endswith(".csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert set(manifest["outputs"]) == set(files) - {"manifest.json"}


def test_seed_override_changes_output(tmp_path, capsys):
    cfg = write(tmp_path, SMALL_SPECTRUM)
    main(["spectrum", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["spectrum", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "9"])
    a = (tmp_path / "a" / "spectrum_transmit_receive.csv").read_bytes()
    b = (tmp_path / "b" / "spectrum_transmit_receive.csv").read_bytes()
    assert a != b


def test_empty_scene_gives_flat_spectra(tmp_path, capsys):
    cfg = write(tmp_path, """
[scene]
empty = true
[spectrum]
n_f_T = 8
n_f_R = 9
n_f_d = 5
covariance = "exact"
""")
    assert main(["spectrum", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    data = np.genfromtxt(tmp_path / "o" / "spectrum_transmit_receive.csv", delimiter=",",
                         names=True, dtype=None, encoding=None)
    assert np.allclose(data["power_db"], 0.0, atol=1e-6)  # eps loading on the DPSS core


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "[scene]\nn_patches = \"many\"\n")
    assert main(["spectrum", "--config", cfg]) == 2
    assert f"{cfg}:2" in capsys.readouterr().err


def test_missing_target_is_config_error(tmp_path, capsys):
    assert main(["sinr", "--config", write(tmp_path, "")]) == 2


def test_numerical_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, """
[scene]
empty = true
noise_power = 0.0
[spectrum]
n_f_T = 8
n_f_R = 9
n_f_d = 5
covariance = "exact"
""")
    assert main(["spectrum", "--config", cfg]) == 3


def test_unknown_preset(capsys):
    assert main(["bench", "--config", "not-a-preset"]) == 2


def test_bad_cli_widths(capsys):
    with pytest.raises(SystemExit):
        main(["reject", "--config", "reject_cluster", "--widths", "0.1,0.2"])


def test_rank_table_preset_cells(tmp_path, capsys):
    cfg = write(tmp_path, """
[rank_table]
betas = [1.0]
n_ambiguities = [2, 9]
""")
    assert main(["rank-table", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    lines = (tmp_path / "o" / "rank_table.csv").read_text().splitlines()
    assert lines[0] == "beta,N_p,predicted,empirical_coarray,empirical_dpss"
    assert lines[1:] == ["1,2,30,30,30", "1,9,120,120,120"]


def test_bench_flop_ordering(tmp_path, capsys):
    cfg = write(tmp_path, """
[scene]
n_patches = 61
[bench]
sensor_pairs = [[1, 2], [2, 3]]
repeats = 1
n_samples = 300
""")
    assert main(["bench", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "bench_summary.json").read_text())
    big = summary["points"][-1]
    assert big["n_coarray"] == 512
    assert big["flops_coarray_dpss"] < big["flops_coarray_direct"]
    assert abs(summary["coarray_direct_log_slope"] - 3) < 0.1
    header = (tmp_path / "o" / "bench.csv").read_text().splitlines()[0]
    assert "seconds" not in header
