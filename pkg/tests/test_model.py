import numpy as np
import pytest

import topotensor.autodiff as ad
from topotensor.autodiff import Tensor
from topotensor.errors import CheckpointError, ConfigError
from topotensor.graphs import normalized_adjacency
from topotensor.layers import finite_difference_check
from topotensor.model import (GraphClassifier, ModelConfig, PackedBatch,
                              load_model, pack_graphs, save_model)
from topotensor.tensornet import Factorization

from conftest import make_graph, random_connected_graph


def small_config(**overrides):
    base = dict(num_classes=2, in_features=3, num_filtrations=2,
                homology_dims=2, resolution=8, hidden=4, embed=4,
                net_hidden=4, conv_channels=4, conv_layers=3, tau=(1, 2, 3),
                factorization=Factorization("cp", (3,)), dropout=0.0)
    base.update(overrides)
    return ModelConfig(**base)


def random_inputs(rng, config, n_graphs=3):
    graphs = [random_connected_graph(rng, n_min=3, n_max=6) for _ in range(n_graphs)]
    graphs = [make_graph(g.node_count, g.edges,
                         features=rng.random((g.node_count, config.in_features)))
              for g in graphs]
    pit = rng.random((n_graphs, config.num_filtrations, config.homology_dims,
                      config.resolution, config.resolution))
    packed = pack_graphs(graphs, config.tau)
    labels = rng.integers(0, config.num_classes, size=n_graphs)
    return graphs, pit, packed, labels


class TestTopoBranch:
    def test_output_shape_contract(self):
        cfg = small_config()
        model = GraphClassifier(cfg, seed=0).eval()
        rng = np.random.default_rng(0)
        for b in (1, 4):
            pit = rng.random((b, 2, 2, 8, 8))
            out = model.topo_forward(pit)
            assert out.shape == (b, cfg.num_filtrations, cfg.embed, cfg.embed)

    def test_single_graph_shape_independent_of_graph_size(self):
        cfg = small_config()
        model = GraphClassifier(cfg, seed=0).eval()
        pit = np.random.default_rng(1).random((2, 2, 8, 8))
        out = model.topo_forward_single(pit)
        assert out.shape == (2, cfg.embed, cfg.embed)

    def test_q_equal_one_skips_pooling(self):
        cfg = small_config(homology_dims=1)
        model = GraphClassifier(cfg, seed=0).eval()
        # the tensor network input keeps the full spatial extent
        assert model.topo_net.input_shape == (2, cfg.conv_channels, 8, 8)
        pit = np.random.default_rng(2).random((3, 2, 1, 8, 8))
        out = model.topo_forward(pit)
        assert out.shape == (3, 2, cfg.embed, cfg.embed)

    def test_q_above_one_pools(self):
        cfg = small_config(homology_dims=2)
        model = GraphClassifier(cfg, seed=0)
        assert model.topo_net.input_shape == (2, cfg.conv_channels)

    def test_zero_image_tensor_output_determined_by_biases(self):
        cfg = small_config()
        model = GraphClassifier(cfg, seed=0).eval()
        z1 = model.topo_forward(np.zeros((2, 2, 2, 8, 8)))
        # identical rows: with zero input every graph gets the bias response
        assert np.allclose(z1.data[0], z1.data[1])

    def test_shape_mismatch_rejected(self):
        model = GraphClassifier(small_config(), seed=0)
        with pytest.raises(ValueError):
            model.topo_forward(np.zeros((1, 2, 2, 9, 9)))


class TestGraphBranch:
    def test_edgeless_graph_propagator_is_identity(self):
        g = make_graph(4, [], features=np.random.default_rng(3).random((4, 3)))
        adj = normalized_adjacency(g)
        assert np.allclose(adj.matrix, np.eye(4))
        packed = pack_graphs([g], (1, 2, 3))
        for tau in (1, 2, 3):
            assert np.allclose(packed.propagators[tau], np.eye(4))

    def test_edgeless_graph_first_block_matches_manual(self):
        cfg = small_config()
        model = GraphClassifier(cfg, seed=0).eval()
        rng = np.random.default_rng(4)
        g = make_graph(4, [], features=rng.random((4, 3)))
        # manual path with no propagation at all (A_hat = I)
        s = Tensor(g.node_features)
        manual = s
        blocks = []
        for i in range(cfg.conv_layers):
            z = ad.relu(manual @ model.thetas[i])
            manual = model.mlps[i](z)
            e = model.expansions[i](manual)
            blocks.append(e.reshape(4, cfg.hidden, cfg.hidden))
        stacked = ad.stack(blocks, axis=1)
        per_node = model.graph_net(stacked)
        expected = per_node.data.mean(axis=0)
        got = model.graph_forward_single(g)
        assert np.allclose(got.data, expected, atol=1e-10)

    def test_stacked_embedding_shape(self):
        cfg = small_config()
        model = GraphClassifier(cfg, seed=0).eval()
        rng = np.random.default_rng(5)
        g = make_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)],
                       features=rng.random((5, 3)))
        out = model.graph_forward_single(g)
        assert out.shape == (cfg.conv_layers, cfg.embed, cfg.embed)

    def test_single_node_graph_valid(self):
        cfg = small_config()
        model = GraphClassifier(cfg, seed=0).eval()
        g = make_graph(1, [], features=np.ones((1, 3)))
        out = model.graph_forward_single(g)
        assert out.shape == (3, cfg.embed, cfg.embed)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            pack_graphs([], (1,))

    def test_node_permutation_invariance(self):
        cfg = small_config()
        model = GraphClassifier(cfg, seed=0).eval()
        rng = np.random.default_rng(6)
        for _ in range(10):
            g = random_connected_graph(rng, n_min=3, n_max=8)
            g = make_graph(g.node_count, g.edges,
                           features=rng.random((g.node_count, 3)))
            perm = rng.permutation(g.node_count)
            gp = g.relabeled(perm)
            out = model.graph_forward_single(g).data
            out_p = model.graph_forward_single(gp).data
            assert np.max(np.abs(out - out_p)) < 1e-6

    def test_batched_equals_per_graph(self):
        cfg = small_config()
        model = GraphClassifier(cfg, seed=0).eval()
        rng = np.random.default_rng(7)
        graphs, pit, packed, _ = random_inputs(rng, cfg, n_graphs=4)
        batched = model.graph_forward(packed).data
        for i, g in enumerate(graphs):
            single = model.graph_forward_single(g).data
            assert np.allclose(batched[i], single, atol=1e-10)


class TestFusionAndClassify:
    def test_logit_shape_and_softmax(self):
        cfg = small_config()
        model = GraphClassifier(cfg, seed=0).eval()
        rng = np.random.default_rng(8)
        _, pit, packed, _ = random_inputs(rng, cfg)
        logits = model(pit, packed)
        assert logits.shape == (3, cfg.num_classes)
        probs = ad.softmax(logits.data)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-10)

    def test_trailing_extent_mismatch_rejected(self):
        cfg = small_config()
        model = GraphClassifier(cfg, seed=0)
        bad = Tensor(np.zeros((2, 2, 3, 3)))
        with pytest.raises(ConfigError):
            model.classify(bad, None)

    def test_end_to_end_gradient_five_graph_batch(self):
        cfg = small_config()
        model = GraphClassifier(cfg, seed=1)
        model.train()
        rng = np.random.default_rng(9)
        _, pit, packed, labels = random_inputs(rng, cfg, n_graphs=5)

        def build():
            logits = model(pit, packed)
            return ad.softmax_cross_entropy(logits, labels)

        err = finite_difference_check(build, model.parameters(), seed=10,
                                      num_coords=4)
        assert err < 1e-4

    def test_eval_forward_deterministic(self):
        cfg = small_config(dropout=0.5)
        model = GraphClassifier(cfg, seed=2).eval()
        rng = np.random.default_rng(10)
        _, pit, packed, _ = random_inputs(rng, cfg)
        a = model(pit, packed).data
        b = model(pit, packed).data
        assert np.array_equal(a, b)


class TestAblationVariants:
    @pytest.mark.parametrize("overrides", [
        {"use_topo_branch": False},
        {"use_graph_branch": False},
        {"tensor_layers": False},
    ])
    def test_variants_train_one_step(self, overrides):
        from topotensor.layers import Adam
        cfg = small_config(**overrides)
        model = GraphClassifier(cfg, seed=3)
        rng = np.random.default_rng(11)
        _, pit, packed, labels = random_inputs(rng, cfg)
        if not cfg.use_topo_branch:
            pit = None
        if not cfg.use_graph_branch:
            packed = None
        opt = Adam(model.parameters(), lr=0.01)
        before = ad.softmax_cross_entropy(model(pit, packed), labels).item()
        for _ in range(10):
            opt.zero_grad()
            loss = ad.softmax_cross_entropy(model(pit, packed), labels)
            loss.backward()
            opt.step()
        after = ad.softmax_cross_entropy(model(pit, packed), labels).item()
        assert np.isfinite(after)
        assert after < before

    def test_both_branches_off_rejected(self):
        with pytest.raises(ConfigError):
            small_config(use_topo_branch=False, use_graph_branch=False)


class TestModelBookkeeping:
    def test_parameters_unique(self):
        model = GraphClassifier(small_config(), seed=0)
        names = [n for n, _ in model.named_parameters()]
        ids = [id(p) for _, p in model.named_parameters()]
        assert len(names) == len(set(names))
        assert len(ids) == len(set(ids))
        assert model.num_parameters() > 0

    def test_checkpoint_round_trip(self, tmp_path):
        cfg = small_config()
        model = GraphClassifier(cfg, seed=4).eval()
        path = tmp_path / "model.bin"
        save_model(model, path)
        clone = load_model(path)
        clone.eval()
        rng = np.random.default_rng(12)
        _, pit, packed, _ = random_inputs(rng, cfg)
        assert np.array_equal(model(pit, packed).data, clone(pit, packed).data)

    def test_checkpoint_config_mismatch(self, tmp_path):
        model = GraphClassifier(small_config(), seed=4)
        path = tmp_path / "model.bin"
        save_model(model, path)
        with pytest.raises(CheckpointError):
            load_model(path, config=small_config(embed=8))
