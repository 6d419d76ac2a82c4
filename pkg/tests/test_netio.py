import json

import numpy as np
import pytest

from ldl.evaluator import Empirical, Gaussian, UniformBox
from ldl.netio import (
    Dataset,
    DenseNetwork,
    Layer,
    NetIOError,
    load_context,
    load_dataset,
    load_network,
    parse_context,
    save_dataset,
    save_network,
)
from support import CORPUS, load, netio_gradient_error


def test_identity_forward():
    net = DenseNetwork.identity(2)
    assert net.forward([3.0, -1.0]).tolist() == [3.0, -1.0]
    assert np.array_equal(net.forward_with_gradient([3.0, -1.0]).input_jacobian(), np.eye(2))


def test_relu_layer():
    net = DenseNetwork([Layer([[1.0]], [-2.0], "relu")])
    assert net.forward([1.0]).tolist() == [0.0]


def test_frozen_random_net():
    net = DenseNetwork.random([3, 4, 2], ["relu", "identity"], seed=5)
    x = np.array([0.5, -1.0, 2.0])
    h = np.maximum(net.layers[0].weight @ x + net.layers[0].bias, 0)
    expected = net.layers[1].weight @ h + net.layers[1].bias
    assert np.allclose(net.forward(x), expected, rtol=0, atol=1e-15)


def test_linear_weight_gradient_is_the_input():
    net = DenseNetwork([Layer([[2.0]], [0.0])])
    _, grads = net.forward_with_gradient([3.0]).backward([1.0])
    assert grads[0][0].tolist() == [[3.0]]


def test_softmax_rows_sum_to_one():
    net = DenseNetwork.random([4, 8, 5], ["relu", "softmax"], seed=2)
    out = net.forward(np.random.default_rng(0).standard_normal((20, 4)))
    assert np.all(np.abs(out.sum(axis=1) - 1.0) <= 1e-12)


def test_trace_value_equals_forward():
    net = DenseNetwork.random([3, 4, 2], ["relu", "softmax"], seed=9)
    x = np.array([0.1, 0.2, -0.3])
    assert np.array_equal(net.forward_with_gradient(x).output, net.forward(x))


def test_gradients_match_finite_differences():
    for seed in range(20):
        assert netio_gradient_error(seed) < 1e-4


def test_dimension_chain_mismatch():
    with pytest.raises(NetIOError, match="layer 1"):
        DenseNetwork([Layer(np.zeros((4, 2)), np.zeros(4)), Layer(np.zeros((3, 2)), np.zeros(3))])


def test_softmax_only_last():
    with pytest.raises(NetIOError):
        DenseNetwork([Layer(np.eye(2), np.zeros(2), "softmax"), Layer(np.eye(2), np.zeros(2))])


def test_unknown_activation():
    with pytest.raises(NetIOError):
        Layer(np.eye(2), np.zeros(2), "tanh")


def test_forward_input_length_checked():
    with pytest.raises(NetIOError):
        DenseNetwork.identity(2).forward([1.0, 2.0, 3.0])


def test_network_file_round_trip(tmp_path):
    net = DenseNetwork.random([3, 4, 2], ["relu", "softmax"], seed=1)
    path = tmp_path / "n.net"
    save_network(net, path)
    again = load_network(path)
    x = np.array([1.0, 2.0, 3.0])
    assert np.array_equal(again.forward(x), net.forward(x))


def test_network_file_errors(tmp_path):
    p = tmp_path / "bad.net"
    p.write_text("{not json")
    with pytest.raises(NetIOError):
        load_network(p)
    p.write_text(json.dumps({"format": "ldl-net", "layers": [{"in": 2, "out": 2, "weights": [1, 2, 3], "bias": [0, 0]}]}))
    with pytest.raises(NetIOError, match="4 weights"):
        load_network(p)


def test_dataset_round_trip(tmp_path):
    ds = Dataset([[0.5, 1.0], [2.0, -1.0]], [[1.0, 0.0], [0.0, 1.0]])
    save_dataset(ds, tmp_path / "d.csv")
    again = load_dataset(tmp_path / "d.csv")
    assert np.array_equal(again.x, ds.x) and np.array_equal(again.y, ds.y)
    assert again.input_names == ["x0", "x1"]


def test_dataset_errors(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x0,label\n1,0\n")
    with pytest.raises(NetIOError, match="label"):
        load_dataset(p)
    p.write_text("x0,y0\n1\n")
    with pytest.raises(NetIOError, match=":2:"):
        load_dataset(p)
    with pytest.raises(NetIOError):
        Dataset([[0.0]], [[0.3, 0.3]]).check_labels()


def test_robustness_context(tmp_path):
    spec = load(f"{CORPUS}/robustness.ldl")
    data = {
        "samplers": {"x": {"kind": "uniform", "lo": 0.0, "hi": 1.0}},
        "bindings": {"eps": 0.1, "delta": 0.3},
    }
    ctx = parse_context(data, spec.as_expr(), spec.type_of())
    assert isinstance(ctx.samplers["x"], UniformBox) and ctx.samplers["x"].dim == 784
    assert ctx.bindings == {"eps": 0.1, "delta": 0.3}


def test_context_kinds():
    data = {"samplers": {
        "a": {"kind": "gaussian", "mean": [0, 0], "std": 0.5},
        "b": {"kind": "empirical", "points": [[0, 0], [1, 0]]},
        "c": {"kind": "box", "center": [1, 1], "radius": 0.5},
    }}
    ctx = parse_context(data)
    assert isinstance(ctx.samplers["a"], Gaussian)
    assert isinstance(ctx.samplers["b"], Empirical)
    assert ctx.samplers["c"].lo.tolist() == [0.5, 0.5]


def test_context_validation():
    spec = load(f"{CORPUS}/robustness2d.ldl")
    e, t = spec.as_expr(), spec.type_of()
    with pytest.raises(NetIOError, match="undeclared"):
        parse_context({"samplers": {"y": {"kind": "uniform", "lo": 0, "hi": 1}}}, e, t)
    with pytest.raises(NetIOError, match="expected 2"):
        parse_context({"samplers": {"x": {"kind": "uniform", "lo": [0, 0, 0], "hi": 1}}}, e, t)
    with pytest.raises(NetIOError, match="non-negative"):
        parse_context({"samplers": {"x": {"kind": "gaussian", "mean": 0, "std": -1}}}, e, t)
    with pytest.raises(NetIOError, match="parameter"):
        parse_context({"bindings": {"zeta": 1.0}}, e, t)


def test_empty_context_file(tmp_path):
    p = tmp_path / "empty.ctx"
    p.write_text("")
    ctx = load_context(str(p))
    assert ctx.samplers == {} and ctx.bindings == {}


def test_empirical_csv_reference(tmp_path):
    save_dataset(Dataset([[0.0, 1.0], [2.0, 3.0]], [[1.0], [1.0]]), tmp_path / "pts.csv")
    (tmp_path / "c.ctx").write_text(json.dumps({"samplers": {"x": {"kind": "empirical", "csv": "pts.csv"}}}))
    ctx = load_context(str(tmp_path / "c.ctx"))
    assert ctx.samplers["x"].points.tolist() == [[0.0, 1.0], [2.0, 3.0]]
