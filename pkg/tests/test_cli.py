import csv
import json

import numpy as np
import pytest

from conftest import digit
from speckle_nlos import cli, imageio
from speckle_nlos.config import load_config, override
from speckle_nlos.dataset import read_dataset
from speckle_nlos.errors import ConfigurationError

TINY = """
[grid]
nx = 64
ny = 64
pitch = 10e-6
wavelength = 632.8e-9

[scenario]
object_size = 0.3e-3
facet = 2

[preprocess]
crop_size = 32

[train]
epochs = 1
batch_size = 8

[data]
count = 24
"""


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    digits = [digit(k % 10, seed=k) for k in range(30)]
    imgs = np.stack([np.rint(d.pixels * 255) for d in digits]).astype(np.uint8)
    (tmp_path / "img.idx").write_bytes(
        bytes([0, 0, 8, 3]) + b"".join(v.to_bytes(4, "big") for v in (30, 28, 28)) + imgs.tobytes()
    )
    (tmp_path / "lab.idx").write_bytes(
        bytes([0, 0, 8, 1]) + (30).to_bytes(4, "big") + bytes(d.label for d in digits)
    )
    cfg = tmp_path / "tiny.ini"
    cfg.write_text(TINY + "mnist_images = img.idx\nmnist_labels = lab.idx\n")
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_full_pipeline(workspace, capsys):
    assert run("--config", "tiny.ini", "--seed", 5, "--out", "d.spkl", "generate") == 0
    out = capsys.readouterr().out
    assert "records: 24" in out and "per-class:" in out
    ds = read_dataset("d.spkl")
    assert len(ds) == 24 and ds.images.shape == (24, 32, 32)
    assert ds.seed_stream == 5

    assert run("--config", "tiny.ini", "--seed", 5, "--out", "m.snet", "train", "d.spkl") == 0
    out = capsys.readouterr().out
    assert "test accuracy:" in out
    log = [json.loads(line) for line in open("m.snet.log.jsonl")]
    assert [e["epoch"] for e in log] == [1]

    assert run("--config", "tiny.ini", "--seed", 5, "--out", "r.json", "eval", "m.snet", "d.spkl") == 0
    report = json.load(open("r.json"))
    assert report["n"] == 1  # 5 % of 24 records, rounded
    assert len(report["confusion"]) == 10

    assert run("--out", "all.json", "eval", "--all", "m.snet", "d.spkl") == 0
    assert json.load(open("all.json"))["n"] == 24


def test_global_flags_work_after_the_subcommand(workspace):
    assert run("generate", "--config", "tiny.ini", "--seed", 8, "--out", "late.spkl", "--count", 20) == 0
    ds = read_dataset("late.spkl")
    assert ds.seed_stream == 8 and len(ds) == 20


def test_flag_beats_config_beats_default(workspace):
    args = cli._build_parser().parse_args(["--config", "tiny.ini", "train", "x", "--epochs", "4"])
    cfg = cli._run_config(args)
    assert cfg.train.epochs == 4  # flag
    assert cfg.train.batch_size == 8  # file
    assert cfg.train.learning_rate == 1e-3  # default
    assert cfg.scenario.grid.nx == 64


def test_scenario_flag(workspace):
    assert run("--config", "tiny.ini", "--out", "tw.spkl", "generate", "--scenario", "two-walls", "--count", 20) == 0
    assert read_dataset("tw.spkl").records[0].provenance.kind == "two-walls"


def test_stats_and_csv(workspace, capsys):
    run("--config", "tiny.ini", "--out", "d.spkl", "generate", "--count", 20)
    capsys.readouterr()
    assert run("stats", "d.spkl", "--record", 2, "--csv", "h.csv") == 0
    out = capsys.readouterr().out
    assert "images: 1" in out and "contrast:" in out
    rows = list(csv.DictReader(open("h.csv")))
    assert len(rows) == 64
    assert set(rows[0]) == {"bin_center", "count", "density"}
    assert sum(int(r["count"]) for r in rows) > 0


def test_render_pgm_bytes(workspace):
    arr = np.array([[0.0, 0.5, 1.0], [0.25, 2.0, -1.0]])
    np.save("a.npy", arr)
    assert run("--out", "a.pgm", "render", "a.npy") == 0
    data = open("a.pgm", "rb").read()
    assert data == b"P5\n3 2\n255\n" + bytes([0, 128, 255, 64, 255, 0])
    assert np.allclose(imageio.read_array("a.pgm"), [[0, 128 / 255, 1], [64 / 255, 1, 0]])


def test_render_png_round_trip(workspace):
    run("--config", "tiny.ini", "--out", "d.spkl", "generate", "--count", 20)
    assert run("--out", "r.png", "render", "d.spkl", "--record", 3) == 0
    img = imageio.read_array("r.png")
    ref = read_dataset("d.spkl").records[3].image.intensity
    assert img.shape == (32, 32)
    assert np.max(np.abs(img - ref)) <= 0.5 / 255 + 1e-6


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["stats", "missing.spkl"], "FileNotFoundError"),
        (["--config", "nope.ini", "generate"], "ConfigurationError"),
        (["render", "a.npy"], "needs --out"),
        (["--out", "x.snet", "train", "junk.bin"], "ParseError"),
    ],
)
def test_errors_exit_one_with_single_line(workspace, capsys, argv, needle):
    (workspace / "junk.bin").write_bytes(b"garbage")
    np.save("a.npy", np.ones((2, 2)))
    assert run(*argv) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: ") and needle in err[0]


def test_usage_error_exits_two(workspace):
    with pytest.raises(SystemExit) as e:
        run("generate", "--scenario", "mirror")
    assert e.value.code == 2


def test_too_few_digits(workspace, capsys):
    assert run("--config", "tiny.ini", "generate", "--count", 100) == 1
    assert "IDX files hold 30" in capsys.readouterr().err


def test_config_rejects_unknown_keys(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[scenario]\nwall_colour = red\n")
    with pytest.raises(ConfigurationError):
        load_config(bad)
    bad.write_text("[lasers]\npower = 1\n")
    with pytest.raises(ConfigurationError):
        load_config(bad)
    with pytest.raises(ConfigurationError):
        override(load_config(), train={"epochs": "ten"})


def test_config_parses_pairs_and_none(tmp_path):
    f = tmp_path / "c.ini"
    f.write_text("[scenario]\nkind = same-side\nobservation_offset = 512, 0\naperture_na = none\n"
                 "[preprocess]\nanchor = 3, 4\n")
    cfg = load_config(f)
    assert cfg.scenario.observation_offset == (512, 0)
    assert cfg.scenario.aperture_na is None
    assert cfg.preprocess.anchor == (3, 4)
