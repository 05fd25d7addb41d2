import pytest

from spinalnet import costing
from spinalnet.modelspec import ModelSpec, SpecError
from spinalnet.presets import get_model_spec


class TestPublishedCounts:
    def test_regression_baseline(self):
        report = costing.cost_report(get_model_spec("t1-baseline"))
        assert report.total_params == 22001
        assert report.total_mults == 21700
        assert report.fc_activations == 300

    def test_regression_spinal(self):
        report = costing.cost_report(get_model_spec("t1-spinal"))
        assert report.total_params == 14301
        assert report.total_mults == 14000
        assert report.fc_activations == 300

    def test_regression_mult_reduction(self):
        assert round((1 - 14000 / 21700) * 100, 2) == 35.48

    def test_mnist_cnn_baseline(self):
        report = costing.cost_report(get_model_spec("t2-cnn"))
        assert report.total_params == 21840
        assert report.fc_mults == 320 * 50 + 50 * 10 == 16500
        assert report.fc_activations == 50

    def test_mnist_spinal_heads(self):
        r8 = costing.cost_report(get_model_spec("t2-spinal8"))
        assert r8.total_params == 13818
        assert r8.fc_mults == 160 * 8 + 5 * (168 * 8) + 48 * 10 == 8480
        assert r8.fc_activations == 48
        r10 = costing.cost_report(get_model_spec("t2-spinal10"))
        assert r10.total_params == 16050

    def test_fc_reductions(self):
        assert round((1 - 8480 / 16500) * 100, 1) == 48.6
        assert (50 - 48) / 50 == 0.04


class TestStructure:
    def test_empty_model(self):
        report = costing.cost_report(ModelSpec((4,), []))
        assert report.total_params == 0
        assert report.total_mults == 0
        assert report.fc_activations == 0

    def test_totals_equal_per_layer_sums(self):
        for name in ("t1-baseline", "t1-spinal", "t2-cnn", "t2-spinal8"):
            report = costing.cost_report(get_model_spec(name))
            assert report.total_params == sum(l.params for l in report.per_layer)
            assert report.total_mults == sum(l.mults for l in report.per_layer)
            assert all(l.params >= 0 and l.mults >= 0 for l in report.per_layer)

    def test_counts_independent_of_weights_and_seed(self):
        import numpy as np

        spec = get_model_spec("t2-spinal8")
        before = costing.cost_report(spec).total_params
        spec.build(rng=np.random.default_rng(7))  # building must not affect counts
        assert costing.cost_report(spec).total_params == before

    def test_param_count_matches_optimizer_leaves(self):
        import numpy as np

        for name in ("t1-baseline", "t1-spinal", "t2-cnn", "t2-spinal8", "t2-spinal10"):
            spec = get_model_spec(name)
            model = spec.build(rng=np.random.default_rng(0))
            registered = sum(p.size for p in model.parameters())
            assert registered == costing.count_params(spec)

    def test_spinal_heads_strictly_cheaper_than_baselines(self):
        assert (costing.count_params(get_model_spec("t1-spinal"))
                < costing.count_params(get_model_spec("t1-baseline")))
        for spinal in ("t2-spinal8", "t2-spinal10"):
            assert (costing.count_params(get_model_spec(spinal))
                    < costing.count_params(get_model_spec("t2-cnn")))

    def test_unknown_layer_kind_rejected(self):
        spec = get_model_spec("t1-baseline")
        spec.layers[0]["kind"] = "mystery"
        with pytest.raises(SpecError):
            costing.cost_report(spec)

    def test_count_helpers_agree_with_report(self):
        spec = get_model_spec("t2-spinal8")
        report = costing.cost_report(spec)
        assert costing.count_params(spec) == report.total_params
        assert costing.count_mults(spec) == {
            "total_mults": report.total_mults, "fc_mults": report.fc_mults,
        }
        assert costing.count_activations(spec) == report.fc_activations
