import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cortical.cli import check_grad
from cortical.nn import (
    ConfigError,
    GraphError,
    MlpConfig,
    NonFiniteError,
    Tensor,
    adam_new,
    adam_step,
    backward,
    finite_diff_check,
    forward,
    mlp_new,
    parameter,
)


def _randomize_biases(net, rng):
    for b in net.biases:
        b.data = rng.normal(0, 0.5, b.shape)


# -- mlp_new -------------------------------------------------------------------


def test_mlp_new_is_deterministic():
    cfg = MlpConfig(1, (8,), 1)
    a, b = mlp_new(cfg, 7), mlp_new(cfg, 7)
    for p, q in zip(a.parameters(), b.parameters()):
        assert np.array_equal(p.data, q.data)


def test_mlp_new_layer_shapes_chain():
    net = mlp_new(MlpConfig(2, (16, 16), 1), 0)
    assert [w.shape for w in net.weights] == [(2, 16), (16, 16), (16, 1)]
    assert [b.shape for b in net.biases] == [(16,), (16,), (1,)]


def test_mlp_new_fan_in_bounds():
    net = mlp_new(MlpConfig(4, (100,), 3), 1)
    for w, b in zip(net.weights, net.biases):
        bound = 1 / np.sqrt(w.shape[0])
        assert np.abs(w.data).max() <= bound
        assert np.abs(b.data).max() <= bound


def test_config_rejects_no_hidden_layer():
    with pytest.raises(ConfigError):
        MlpConfig(1, (), 1)


@pytest.mark.parametrize("kwargs", [
    dict(input_dim=0, hidden_layers=(4,), output_dim=1),
    dict(input_dim=1, hidden_layers=(0,), output_dim=1),
    dict(input_dim=1, hidden_layers=(4,), output_dim=1, hidden_activation="gelu"),
    dict(input_dim=1, hidden_layers=(4,), output_dim=1, output_activation="relu"),
])
def test_config_rejects_invalid(kwargs):
    with pytest.raises(ConfigError):
        MlpConfig(**kwargs)


def test_float32_network_is_rounded_float64_network():
    cfg = MlpConfig(2, (5,), 1)
    a, b = mlp_new(cfg, 3, np.float64), mlp_new(cfg, 3, np.float32)
    for p, q in zip(a.parameters(), b.parameters()):
        assert q.data.dtype == np.float32
        assert np.array_equal(p.data.astype(np.float32), q.data)


# -- forward -------------------------------------------------------------------


def test_zero_weight_network_outputs_bias():
    net = mlp_new(MlpConfig(3, (4, 4), 2), 0)
    for w in net.weights:
        w.data[:] = 0
    net.biases[-1].data = np.array([0.25, -1.5])
    out = forward(net, np.random.default_rng(0).normal(size=(6, 3))).data
    assert np.allclose(out, [0.25, -1.5])


def test_softplus_head_is_positive():
    net = mlp_new(MlpConfig(2, (8,), 1, output_activation="softplus"), 0)
    out = forward(net, np.random.default_rng(1).normal(scale=50, size=(200, 2))).data
    assert np.all(out > 0)


@pytest.mark.parametrize("head", ["identity", "softplus", "sigmoid", "tanh-scaled"])
@pytest.mark.parametrize("act", ["relu", "tanh"])
def test_batched_forward_matches_row_by_row(act, head):
    net = mlp_new(MlpConfig(3, (7, 5), 2, act, head, 2.0), 11)
    batch = np.random.default_rng(2).normal(size=(4, 3))
    whole = forward(net, batch).data
    rows = np.vstack([forward(net, batch[i:i + 1]).data for i in range(4)])
    assert np.allclose(whole, rows, rtol=0, atol=1e-14)


def test_forward_rejects_wrong_width():
    net = mlp_new(MlpConfig(3, (4,), 1), 0)
    with pytest.raises(ValueError):
        forward(net, np.zeros((2, 2)))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_forward_flags_overflow():
    net = mlp_new(MlpConfig(1, (4,), 1), 0)
    for w in net.weights:
        w.data[:] = 1e200
    with pytest.raises(NonFiniteError):
        forward(net, np.ones((1, 1)))


# -- backward ------------------------------------------------------------------


def test_sum_of_squares_gradient_is_2w():
    w = parameter(np.array([1.0, -2.0, 3.5]))
    (g,) = backward((w * w).sum(), [w])
    assert np.allclose(g, 2 * w.data)


def test_unused_parameter_has_zero_gradient():
    w, v = parameter(np.ones(3)), parameter(np.ones((2, 2)))
    gw, gv = backward(w.square().sum(), [w, v])
    assert np.allclose(gw, 2.0)
    assert gv.shape == (2, 2) and np.all(gv == 0)


def test_backward_rejects_non_scalar():
    w = parameter(np.ones(3))
    with pytest.raises(GraphError):
        backward(w * 2.0, [w])


def test_backward_without_forward():
    w = parameter(np.ones(()))
    with pytest.raises(GraphError):
        backward(Tensor(1.0), [w])


def test_log_of_nonpositive_is_an_error():
    with pytest.raises(NonFiniteError):
        Tensor(np.array([1.0, 0.0])).log()


def test_broadcast_gradients_sum_back():
    w = parameter(np.ones((1, 3)))
    x = Tensor(np.arange(6.0).reshape(2, 3))
    (g,) = backward((x * w).sum(), [w])
    assert np.allclose(g, [[3.0, 5.0, 7.0]])


# -- finite differences ----------------------------------------------------------


def test_linear_model_gradcheck_is_exact():
    rng = np.random.default_rng(0)
    net = mlp_new(MlpConfig(3, (4,), 1), 0)
    # a single hidden layer with every unit active behaves linearly on this batch
    net.biases[0].data = np.full(4, 50.0)
    x, y = rng.normal(size=(8, 3)), rng.normal(size=(8, 1))
    err = finite_diff_check(net, lambda n: (forward(n, x) - y).square().mean())
    assert err < 1e-8


def test_tanh_depth2_gradcheck():
    rng = np.random.default_rng(1)
    net = mlp_new(MlpConfig(2, (6, 6), 1, "tanh"), 4)
    _randomize_biases(net, rng)
    x, y = rng.normal(size=(5, 2)), rng.normal(size=(5, 1))
    assert finite_diff_check(net, lambda n: (forward(n, x) - y).square().mean()) < 1e-4


def test_gradcheck_rejects_zero_step():
    net = mlp_new(MlpConfig(1, (2,), 1), 0)
    with pytest.raises(ValueError):
        finite_diff_check(net, lambda n: forward(n, np.ones((1, 1))).sum(), step=0.0)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31 - 1),
       act=st.sampled_from(["relu", "tanh"]),
       head=st.sampled_from(["identity", "softplus", "sigmoid", "tanh-scaled"]),
       widths=st.lists(st.integers(1, 6), min_size=1, max_size=3))
def test_gradcheck_property(seed, act, head, widths):
    rng = np.random.default_rng(seed)
    net = mlp_new(MlpConfig(2, tuple(widths), 1, act, head, 1.5), seed)
    _randomize_biases(net, rng)
    x = rng.normal(size=(4, 2))
    y = rng.normal(size=(4, 1))
    assert finite_diff_check(net, lambda n: (forward(n, x) - y).square().mean()) < 1e-4


def test_check_grad_entry_point():
    ok, lines = check_grad(n_arch=4, seed=3)
    assert ok and len(lines) == 4


# -- Adam ----------------------------------------------------------------------


def _scalar_net():
    net = mlp_new(MlpConfig(1, (1,), 1), 0)
    return net


def test_adam_zero_gradient_leaves_parameters():
    net = mlp_new(MlpConfig(2, (3,), 1), 0)
    before = net.state()
    state = adam_new(net, 0.1)
    adam_step(net, [np.zeros_like(p.data) for p in net.parameters()], state)
    for a, b in zip(before, net.state()):
        assert np.array_equal(a, b)
    assert state.step == 1


@pytest.mark.parametrize("maximize", [False, True])
@pytest.mark.parametrize("g", [0.3, -2.0])
def test_adam_sign_behaviour(maximize, g):
    net = _scalar_net()
    state = adam_new(net, 0.01)
    p = net.parameters()[0]
    trail = [p.data.copy()]
    for _ in range(50):
        grads = [np.full_like(q.data, g) for q in net.parameters()]
        adam_step(net, grads, state, maximize=maximize)
        trail.append(p.data.copy())
    moves = np.diff(np.array(trail).ravel())
    direction = np.sign(g) * (1 if maximize else -1)
    assert np.all(np.sign(moves) == direction)


def test_adam_quadratic_bowl():
    net = _scalar_net()
    w = net.parameters()[0]
    w.data = np.zeros_like(w.data)
    state = adam_new(net, 0.05, beta1=0.9)
    for _ in range(2000):
        loss = (w - 3.0).square().sum()
        grads = backward(loss, net.parameters())
        adam_step(net, grads, state)
    assert abs(w.data.item() - 3.0) < 1e-2


def test_adam_rejects_shape_mismatch():
    net = _scalar_net()
    state = adam_new(net, 0.1)
    with pytest.raises(ValueError):
        adam_step(net, [np.zeros(5)] + [np.zeros_like(p.data) for p in net.parameters()[1:]], state)


def test_training_step_is_deterministic():
    def run():
        net = mlp_new(MlpConfig(2, (4,), 1, "tanh"), 9)
        state = adam_new(net, 0.01)
        x = np.random.default_rng(0).normal(size=(6, 2))
        for _ in range(3):
            grads = backward(forward(net, x).square().mean(), net.parameters())
            adam_step(net, grads, state)
        return net.state()

    for a, b in zip(run(), run()):
        assert np.array_equal(a, b)
