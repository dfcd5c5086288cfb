import numpy as np
import pytest

from oracles import central_diff, naive_forward, rel_err
from tscausalnn import model as M
from tscausalnn.exceptions import DimensionError


def toy(variant="conv2d", activation="tanh", seed=0, C=3):
    cfg = M.ModelConfig(n=3, l_max=2, latent_channels=C, activation=activation, variant=variant)
    state = M.init(cfg, seed=seed, scale=0.8)
    x = np.random.default_rng(100 + seed).uniform(0, 1, size=(5, 3, 3))
    return state, x


def fd_grads(state, x, target):
    def loss_for(name):
        def f(v):
            s = state.copy()
            s.params[name] = v
            return 0.5 * np.sum((M.forward(s, x) - target) ** 2)
        return f
    return {k: central_diff(loss_for(k), v) for k, v in state.params.items()}


@pytest.mark.parametrize("variant", ["conv2d", "conv1d-ablation"])
@pytest.mark.parametrize("activation", ["relu", "tanh"])
def test_backward_matches_finite_differences(variant, activation):
    state, x = toy(variant, activation)
    target = np.random.default_rng(9).normal(size=(5, 3))
    pred = M.forward(state, x)
    grads = M.backward(state, x, pred - target)
    ref = fd_grads(state, x, target)
    ref["kernel"][M.mask_index(state.config)] = 0.0
    for name in state.params:
        assert rel_err(grads[name], ref[name]) < 1e-4, name


def test_forward_matches_naive_loops():
    for variant in ("conv2d", "conv1d-ablation"):
        state, x = toy(variant, "relu", seed=2)
        ref = naive_forward(state.params, x, "relu", "conv1d" if variant != "conv2d" else "conv2d")
        assert np.allclose(M.forward(state, x), ref, atol=1e-12)


def test_init_shapes_determinism_and_mask():
    cfg = M.ModelConfig(n=4, l_max=5, latent_channels=8)
    a, b = M.init(cfg, seed=3), M.init(cfg, seed=3)
    assert a.params["kernel"].shape == (4, 4, 6, 8)
    assert a.params["kernel"][0].size == 4 * 6 * 8
    for k in a.params:
        assert np.array_equal(a.params[k], b.params[k])
        assert np.all(np.abs(a.params[k]) <= 0.1)
    assert not a.params["kernel"][M.mask_index(cfg)].any()


def test_zero_weights_predict_bias():
    state, x = toy()
    for k in ("kernel", "latent_w", "latent_b"):
        state.params[k] = np.zeros_like(state.params[k])
    assert np.allclose(M.forward(state, x), np.broadcast_to(state.params["bias"], (5, 3)))


def test_own_current_cell_is_ignored():
    state, x = toy(seed=4)
    base = M.forward(state, x)
    for i in range(3):
        y = x.copy()
        y[:, i, -1] += 5.0
        assert np.array_equal(M.forward(state, y)[:, i], base[:, i])


def test_identical_samples_identical_rows():
    state, x = toy()
    x[:] = x[0]
    pred = M.forward(state, x)
    assert np.all(pred == pred[0])


def test_heads_are_independent():
    state, x = toy(seed=5)
    base = M.forward(state, x)
    other = state.copy()
    other.params["kernel"][1] += 1.0
    other.params["bias"][1] += 1.0
    out = M.forward(other, x)
    assert np.array_equal(out[:, [0, 2]], base[:, [0, 2]])
    assert not np.allclose(out[:, 1], base[:, 1])


def test_backward_zero_gradient_and_mask():
    state, x = toy()
    g = M.backward(state, x, np.zeros((5, 3)))
    assert all(not v.any() for v in g.values())
    g = M.backward(state, x, np.ones((5, 3)))
    assert not g["kernel"][M.mask_index(state.config)].any()


def test_variants_differ():
    a, x = toy("conv2d", seed=1)
    b, _ = toy("conv1d-ablation", seed=1)
    assert not np.allclose(M.forward(a, x), M.forward(b, x))
    assert b.params["kernel"].shape[-1] == 1


def test_shape_errors():
    state, x = toy()
    with pytest.raises(DimensionError):
        M.forward(state, x[:, :2])
    with pytest.raises(DimensionError):
        M.backward(state, x, np.zeros((5, 2)))


def test_config_validation():
    with pytest.raises(ValueError):
        M.ModelConfig(n=1, l_max=2)
    with pytest.raises(ValueError):
        M.ModelConfig(n=3, l_max=0)
    with pytest.raises(ValueError):
        M.ModelConfig(n=3, l_max=2, activation="gelu")
    assert M.ModelConfig(n=3, l_max=2, variant="conv1d").variant == "conv1d-ablation"


def test_adjacency_is_channel_norm():
    state, _ = toy()
    adj = M.adjacency_array(state)
    k = state.params["kernel"]
    for j in range(3):
        for i in range(3):
            for c in range(3):
                assert adj[i, c, j] == pytest.approx(np.linalg.norm(k[j, i, c]))
    assert not adj[np.arange(3), 2, np.arange(3)].any()
    single, _ = toy("conv1d-ablation")
    assert np.allclose(M.adjacency_array(single)[0, 0, 1], abs(single.params["kernel"][1, 0, 0, 0]))
    zero = state.copy()
    zero.params["kernel"][2] = 0.0
    assert not M.adjacency_array(zero)[:, :, 2].any()


def test_adjacency_vjps_match_finite_differences():
    state, _ = toy(seed=6)
    d = np.random.default_rng(0).normal(size=(3, 3, 3))

    def f_l1(k):
        s = state.copy()
        s.params["kernel"] = k
        return float(np.sum(d * M.adjacency_array(s)))

    def f_sq(k):
        s = state.copy()
        s.params["kernel"] = k
        return float(np.sum(d * M.adjacency_array(s) ** 2))

    k = state.params["kernel"]
    ref1 = central_diff(f_l1, k)
    ref2 = central_diff(f_sq, k)
    ref1[M.mask_index(state.config)] = ref2[M.mask_index(state.config)] = 0.0
    assert rel_err(M.adjacency_vjp(state, d), ref1) < 1e-6
    assert rel_err(M.squared_adjacency_vjp(state, d), ref2) < 1e-6


def test_checkpoint_round_trip(tmp_path):
    state, x = toy("conv1d-ablation")
    back = M.load_checkpoint(M.save_checkpoint(state, tmp_path / "c.json"))
    assert back.config == state.config
    assert np.array_equal(M.forward(back, x), M.forward(state, x))
