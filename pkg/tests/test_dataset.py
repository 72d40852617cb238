import gzip
import struct

import numpy as np
import pytest

from conftest import digit
from speckle_nlos import optics as o
from speckle_nlos.dataset import (
    Dataset,
    LabeledImage,
    PreprocessConfig,
    add_noise,
    binarize,
    crop,
    derive_seed,
    embed_object,
    generate_dataset,
    load_idx,
    load_idx_arrays,
    normalize,
    preprocess,
    read_dataset,
    regenerate_raw,
    split_train_test,
    write_dataset,
)
from speckle_nlos.dataset import container, idx
from speckle_nlos.errors import (
    ConfigurationError,
    DegenerateInputError,
    DomainError,
    ParseError,
    ShapeError,
)
from speckle_nlos.scenario import ScenarioConfig

GRID = o.GridSpec(128, 128, 10e-6, 632.8e-9)


def write_idx(tmp_path, images, labels):
    """Reference IDX writer, independent of the reader under test."""
    n, r, c = images.shape
    ip, lp = tmp_path / "img.idx", tmp_path / "lab.idx"
    with open(ip, "wb") as f:
        f.write(bytes([0, 0, 8, 3]))
        for v in (n, r, c):
            f.write(v.to_bytes(4, "big"))
        f.write(images.astype(np.uint8).tobytes())
    with open(lp, "wb") as f:
        f.write(bytes([0, 0, 8, 1]) + n.to_bytes(4, "big") + bytes(labels.tolist()))
    return ip, lp


@pytest.fixture
def fixture_idx(tmp_path):
    rng = np.random.default_rng(42)
    images = rng.integers(0, 256, size=(12, 28, 28), dtype=np.uint8)
    labels = np.arange(12, dtype=np.uint8) % 10
    return write_idx(tmp_path, images, labels), images, labels


# --- IDX -----------------------------------------------------------------


def test_idx_parse_is_byte_faithful(fixture_idx):
    (ip, lp), images, labels = fixture_idx
    got_i, got_l = load_idx_arrays(ip, lp)
    assert got_i.dtype == np.uint8
    assert np.array_equal(got_i, images)
    assert np.array_equal(got_l, labels)
    assert got_i.tobytes() == ip.read_bytes()[16:]


def test_idx_limit_and_scaling(fixture_idx):
    (ip, lp), images, labels = fixture_idx
    digits = load_idx(ip, lp, limit=5)
    assert len(digits) == 5
    assert digits[4].label == labels[4]
    assert np.array_equal(digits[4].pixels * 255.0, images[4].astype(float))


def test_idx_accepts_gzip(fixture_idx, tmp_path):
    (ip, lp), images, _ = fixture_idx
    gz = tmp_path / "img.idx.gz"
    gz.write_bytes(gzip.compress(ip.read_bytes()))
    assert np.array_equal(load_idx_arrays(gz, lp)[0], images)


def test_idx_errors_report_offsets(fixture_idx):
    (ip, lp), _, _ = fixture_idx
    data = ip.read_bytes()
    with pytest.raises(ParseError, match="magic") as e:
        idx.parse_images(b"\x00\x00\x08\x01" + data[4:])
    assert e.value.offset == 0
    with pytest.raises(ParseError, match="truncated") as e:
        idx.parse_images(data[:-1])
    assert e.value.offset == len(data) - 1
    with pytest.raises(ParseError):
        idx.parse_images(data[:10])
    bad = bytearray(lp.read_bytes())
    bad[8 + 3] = 11
    with pytest.raises(ParseError, match="outside") as e:
        idx.parse_labels(bytes(bad))
    assert e.value.offset == 11


def test_idx_count_mismatch(tmp_path):
    ip, _ = write_idx(tmp_path, np.zeros((3, 2, 2), np.uint8), np.zeros(3, np.uint8))
    lp = tmp_path / "short.idx"
    lp.write_bytes(struct.pack(">II", 0x801, 2) + b"\x00\x00")
    with pytest.raises(ParseError, match="mismatch"):
        load_idx_arrays(ip, lp)


def test_labeled_image_domain():
    with pytest.raises(DomainError):
        LabeledImage(np.zeros((2, 2)), 10)
    with pytest.raises(DomainError):
        LabeledImage(np.full((2, 2), 1.5), 1)


# --- object masks ----------------------------------------------------------


def test_binarize_is_strict_threshold():
    img = LabeledImage(np.array([[0.2, 0.5], [0.51, 1.0]]), 4)
    assert np.array_equal(binarize(img).pixels, [[0, 0], [1, 1]])
    with pytest.raises(DomainError):
        binarize(img, 1.0)


def test_embed_centres_and_resamples():
    px = np.zeros((28, 28))
    px[:14, :] = 1.0
    m = embed_object(LabeledImage(px, 1), GRID, 56 * GRID.pitch)
    t = m.transmittance
    assert t.shape == GRID.shape
    assert t[36:64, 36:92].all() and not t[64:92, 36:92].any()
    assert not t[:36].any() and not t[92:].any()
    with pytest.raises(ConfigurationError):
        embed_object(LabeledImage(px, 1), GRID, 200 * GRID.pitch)


# --- preprocessing -------------------------------------------------------


def test_centre_crop_window():
    g = o.GridSpec(512, 512, 10e-6, 632.8e-9)
    I = np.arange(512 * 512, dtype=float).reshape(512, 512)
    c = crop(o.IntensityImage(g, I), 200)
    assert np.array_equal(c.intensity, I[156:356, 156:356])
    assert c.grid.shape == (200, 200)
    assert np.array_equal(crop(o.IntensityImage(g, I), 10, (3, 5)).intensity, I[3:13, 5:15])
    with pytest.raises(ShapeError):
        crop(o.IntensityImage(g, I), 10, (505, 0))


def test_noise_std_scales_with_mean():
    g = o.GridSpec(256, 256, 10e-6, 632.8e-9)
    img = o.IntensityImage(g, np.full(g.shape, 3.0))
    noisy = add_noise(img, 0.05, seed=9).intensity
    assert np.std(noisy) == pytest.approx(0.05 * 3.0, rel=0.05)
    assert np.array_equal(noisy, add_noise(img, 0.05, seed=9).intensity)
    assert noisy.min() >= 0
    assert np.array_equal(add_noise(img, 0.0, 1).intensity, img.intensity)


def test_normalize_range_and_constant():
    g = o.GridSpec(4, 4, 1.0, 1.0)
    out = normalize(o.IntensityImage(g, np.arange(16.0).reshape(4, 4) + 5)).intensity
    assert out.min() == 0.0 and out.max() == 1.0
    with pytest.raises(DegenerateInputError):
        normalize(o.IntensityImage(g, np.ones((4, 4))))


def test_preprocess_order_is_crop_noise_normalize():
    g = o.GridSpec(128, 128, 10e-6, 632.8e-9)
    I = np.random.default_rng(3).exponential(size=g.shape)
    img = o.IntensityImage(g, I)
    cfg = PreprocessConfig(crop_size=32, noise_sigma=0.1)
    out = preprocess(img, cfg, noise_seed=5)
    manual = normalize(add_noise(crop(img, 32), 0.1, 5)).intensity
    assert out.intensity.dtype == np.float32
    assert np.array_equal(out.intensity, manual.astype(np.float32))
    # noise drawn on the full frame and then cropped is a different image
    other = normalize(crop(add_noise(img, 0.1, 5), 32)).intensity.astype(np.float32)
    assert not np.array_equal(out.intensity, other)


# --- generation, split and container ---------------------------------------


@pytest.fixture(scope="module")
def small_dataset():
    cfg = ScenarioConfig(grid=GRID, object_size=0.5e-3, facet=2)
    digits = [digit(k % 10, seed=k) for k in range(24)]
    prep = PreprocessConfig(crop_size=32)
    return Dataset(generate_dataset(cfg, digits, 77, prep), cfg, prep, 77), digits


def test_generation_is_ordered_and_seeded(small_dataset):
    ds, digits = small_dataset
    assert [r.label for r in ds.records] == [d.label for d in digits]
    assert ds.records[5].noise_seed == derive_seed(77, 5)
    assert ds.records[5].provenance.object_id == 5
    assert ds.images.shape == (24, 32, 32) and ds.images.dtype == np.float32


def test_parallel_generation_matches_serial(small_dataset):
    ds, digits = small_dataset
    par = generate_dataset(ds.scenario, digits[:6], 77, ds.preprocess, workers=2)
    for a, b in zip(par, ds.records[:6]):
        assert np.array_equal(a.image.intensity, b.image.intensity)


def test_record_regenerates_from_provenance(small_dataset):
    ds, digits = small_dataset
    rec = ds.records[7]
    raw = regenerate_raw(rec, digits[7], ds.preprocess)
    again = preprocess(raw, ds.preprocess, rec.noise_seed)
    assert np.array_equal(again.intensity, rec.image.intensity)


def test_split_is_seeded_partition():
    a = split_train_test(2000, 0.95, split_seed=3)
    assert len(a.train) == 1900 and len(a.test) == 100
    assert sorted(a.train + a.test) == list(range(2000))
    assert a == split_train_test(2000, 0.95, split_seed=3)
    assert a.test != split_train_test(2000, 0.95, split_seed=4).test
    with pytest.raises(ConfigurationError):
        split_train_test(19)


def test_spkl_round_trip_is_bit_exact(small_dataset, tmp_path):
    ds, _ = small_dataset
    path = tmp_path / "d.spkl"
    write_dataset(path, ds)
    back = read_dataset(path)
    assert np.array_equal(back.images, ds.images)
    assert back.images.tobytes() == ds.images.tobytes()
    assert back.scenario == ds.scenario and back.preprocess == ds.preprocess
    assert [r.provenance for r in back.records] == [r.provenance for r in ds.records]
    assert container.to_bytes(back) == path.read_bytes()


def test_spkl_corruption_detected(small_dataset):
    ds, _ = small_dataset
    data = container.to_bytes(ds)
    with pytest.raises(ParseError, match="magic"):
        container.from_bytes(b"SPKL2\n" + data[6:])
    with pytest.raises(ParseError, match="truncated"):
        container.from_bytes(data[:-4])
    with pytest.raises(ParseError, match="trailing"):
        container.from_bytes(data + b"\x00")
    with pytest.raises(ParseError, match="JSON"):
        container.from_bytes(data[:6] + b"{oops\n" + data[6:])


def test_split_partition_property():
    rng = np.random.default_rng(0)
    for n in rng.integers(20, 1001, 25):
        sp = split_train_test(int(n), 0.95, int(rng.integers(1 << 30)))
        assert not set(sp.train) & set(sp.test)
        assert sorted(sp.train + sp.test) == list(range(n))
        assert len(sp.train) == round(0.95 * n)
    assert len(split_train_test(10_000).test) == 500
