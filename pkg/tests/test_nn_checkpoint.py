import json

import numpy as np
import numpy.testing as npt
import pytest

from fitpick.errors import LoadError
from fitpick.nn import Mlp, load_arrays, load_mlp, save_arrays, save_mlp


def test_mlp_roundtrip_bit_identical_forward(tmp_path):
    rng = np.random.default_rng(11)
    mlp = Mlp.init([4, 6, 3], ["relu", "identity"], rng)
    x = rng.normal(size=(5, 4))

    first = tmp_path / "a.nn"
    second = tmp_path / "b.nn"
    save_mlp(first, mlp)
    loaded, extra = load_mlp(first)
    assert extra == {}
    save_mlp(second, loaded)
    reloaded, _ = load_mlp(second)

    # f32 truncation happens once; the serialized form is then a fixed point
    npt.assert_array_equal(loaded.forward(x), reloaded.forward(x))
    assert first.read_bytes()[first.read_bytes().index(b"\n"):] == \
        second.read_bytes()[second.read_bytes().index(b"\n"):]


def test_header_is_inspectable_json(tmp_path):
    rng = np.random.default_rng(12)
    mlp = Mlp.init([2, 2], ["sigmoid"], rng)
    path = tmp_path / "m.nn"
    save_mlp(path, mlp, extra={"note": "test"})
    header = json.loads(path.read_bytes().split(b"\n", 1)[0])
    assert header["kind"] == "mlp"
    assert header["layers"] == [{"in": 2, "out": 2, "activation": "sigmoid"}]
    assert header["extra"] == {"note": "test"}


def test_blob_layout_is_layer_order_weights_then_bias(tmp_path):
    w = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([5.0, 6.0])
    from fitpick.nn import DenseLayer

    path = tmp_path / "m.nn"
    save_mlp(path, Mlp([DenseLayer(w, b, "identity")]))
    blob = path.read_bytes().split(b"\n", 1)[1]
    values = np.frombuffer(blob, dtype="<f4")
    npt.assert_array_equal(values, [1, 2, 3, 4, 5, 6])


def test_truncated_blob_rejected(tmp_path):
    rng = np.random.default_rng(13)
    mlp = Mlp.init([3, 3], ["identity"], rng)
    path = tmp_path / "m.nn"
    save_mlp(path, mlp)
    data = path.read_bytes()
    path.write_bytes(data[:-4])
    with pytest.raises(LoadError, match="shorter"):
        load_mlp(path)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(LoadError, match="not found"):
        load_mlp(tmp_path / "nope.nn")


def test_named_arrays_roundtrip(tmp_path):
    rng = np.random.default_rng(14)
    arrays = {"w": rng.normal(size=(2, 3)), "b": rng.normal(size=(3,))}
    path = tmp_path / "c.nn"
    save_arrays(path, "toy", arrays, extra={"k": 1})
    loaded, extra = load_arrays(path, "toy")
    assert extra == {"k": 1}
    for name in arrays:
        npt.assert_allclose(loaded[name], arrays[name], atol=1e-6)
    with pytest.raises(LoadError, match="expected kind"):
        load_arrays(path, "other")
