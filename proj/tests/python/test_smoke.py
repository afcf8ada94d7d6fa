import numpy as np
import pytest

import sdrcnn


def scene_pair(seed=1, size=16, bands=4):
    ms, pan = sdrcnn.synth_scene(seed, size, bands)
    lrms = sdrcnn.degrade_ms(ms)
    pan_lr = sdrcnn.degrade_pan(pan)
    return ms, pan, lrms, pan_lr


def test_synth_scene_shapes_and_range():
    ms, pan = sdrcnn.synth_scene(3, 16, 4)
    assert ms.shape == (4, 16, 16)
    assert pan.shape == (1, 64, 64)
    assert ms.min() >= 0.0 and ms.max() <= 1.0


def test_zero_model_is_bicubic():
    cfg = sdrcnn.ModelConfig()
    cfg.bands = 4
    model = sdrcnn.Model.zeros(cfg)
    _, _, lrms, pan_lr = scene_pair()
    out = model.predict(pan_lr, lrms)
    assert out.shape == (4, 16, 16)
    np.testing.assert_array_equal(out, sdrcnn.upsample_bicubic(lrms, 4))


def test_default_config_budget():
    cfg = sdrcnn.ModelConfig()
    assert cfg.param_count() == 101134
    assert sdrcnn.budget_width(50000) < sdrcnn.budget_width(200000)
    feats = sdrcnn.Model.initialize(cfg, 0).addition_features(np.zeros((16, 16)), np.zeros((8, 4, 4)))
    assert [f.shape[1] for f in feats] == [52, 52, 52]


def test_classical_methods_and_metrics():
    ms, _, lrms, pan_lr = scene_pair()
    for fused in (sdrcnn.sfim(pan_lr + 0.05, lrms), sdrcnn.gram_schmidt(pan_lr, lrms)):
        assert fused.shape == ms.shape
        row = sdrcnn.reduced_metrics(fused, ms, ratio=4)
        assert set(row) == {"SAM", "ERGAS", "SCC", "Q2n"}
    ideal = sdrcnn.reduced_metrics(ms, ms)
    assert ideal == {"SAM": 0.0, "ERGAS": 0.0, "SCC": 1.0, "Q2n": 1.0}
    assert sdrcnn.sam(ms, ms) == 0.0
    assert np.all(sdrcnn.aem(ms, ms) == 0.0)


def test_smooth_loss_and_split():
    raw = [1.0, 3.0, 5.0]
    assert sdrcnn.smooth_loss(raw, 2) == [1.0, 2.0, 4.0]
    s = sdrcnn.split([f"id{i}" for i in range(10)], 7)
    assert (len(s.train), len(s.val), len(s.test)) == (7, 2, 1)


def test_raster_and_checkpoint_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.random((3, 5, 7))
    sdrcnn.write_raster(img, str(tmp_path / "a.msr"))
    np.testing.assert_array_equal(sdrcnn.read_raster(str(tmp_path / "a.msr")), img)

    cfg = sdrcnn.ModelConfig()
    cfg.bands, cfg.width, cfg.expansion = 4, 6, 2
    model = sdrcnn.Model.initialize(cfg, 3)
    model.save(str(tmp_path / "m.ckpt"))
    loaded = sdrcnn.Model.load(str(tmp_path / "m.ckpt"))
    pan, lrms = rng.random((16, 16)), rng.random((4, 4, 4))
    np.testing.assert_array_equal(loaded.predict(pan, lrms), model.predict(pan, lrms))


def test_errors_are_python_exceptions(tmp_path):
    with pytest.raises(sdrcnn.ShapeError):
        sdrcnn.sam(np.zeros((2, 4, 4)), np.zeros((3, 4, 4)))
    (tmp_path / "junk.msr").write_bytes(b"nope")
    with pytest.raises(sdrcnn.DataError, match="not a raster file"):
        sdrcnn.read_raster(str(tmp_path / "junk.msr"))


def test_cli_simulate_and_train(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "sensor.bands=4\nmodel.bands=4\nmodel.width=6\nmodel.expansion=2\n"
        "simulate.scenes=1\nsimulate.scene_size=32\nsimulate.patch=16\nsimulate.stride=16\n"
    )
    assert sdrcnn.cli(["simulate", "--config", str(cfg), "--out-dir", str(tmp_path / "data")]) == 0
    assert sdrcnn.cli(["nonsense"]) == 1
    seen = []
    model, losses = sdrcnn.train(
        str(tmp_path / "data"),
        "model.bands=4\nmodel.width=6\nmodel.expansion=2\ntrain.iterations=3\ntrain.batch_size=2\n",
        on_iteration=lambda it, loss, params: seen.append(it) or True,
    )
    assert len(losses) == 3
    assert seen == [0, 1, 2]
    assert model.config.width == 6
