# test_fusion_math.py

import numpy as np
import pytest
from scipy.special import softmax

from degradekit.exceptions import InvalidArgumentError
from degradekit.fusion_math import AttentionWeights, FeatureMap, FusionMath, ModulationParams
from degradekit.signatures import Embedding


def test_attention_rows_are_convex_combinations(rng):
    f_ir = FeatureMap(rng.standard_normal((6, 4)))
    f_vi = FeatureMap(rng.standard_normal((5, 4)))
    weights = AttentionWeights.seeded(4, seed=1)
    fused_ir, fused_vi = FusionMath.cross_attention_swap(f_ir, f_vi, weights)
    assert fused_ir.data.shape == (5, 4), f"Expected (5, 4), got {fused_ir.data.shape}"
    assert fused_vi.data.shape == (6, 4)
    v_ir = f_ir.data @ weights.w_v
    for row in fused_ir.data:
        assert np.all(row >= v_ir.min(axis=0) - 1e-12) and np.all(row <= v_ir.max(axis=0) + 1e-12)
    scores = (f_vi.data @ weights.w_q) @ (f_ir.data @ weights.w_k).T / 2.0
    assert np.allclose(softmax(scores, axis=1).sum(axis=1), 1.0)


def test_single_token_returns_value_row(rng):
    f_ir = FeatureMap(rng.standard_normal((1, 3)))
    f_vi = FeatureMap(rng.standard_normal((4, 3)))
    weights = AttentionWeights.seeded(3, seed=2)
    fused_ir, _ = FusionMath.cross_attention_swap(f_ir, f_vi, weights)
    expected = np.broadcast_to(f_ir.data @ weights.w_v, (4, 3))
    assert np.allclose(fused_ir.data, expected)


def test_identical_inputs_give_identical_outputs(rng):
    f = FeatureMap(rng.standard_normal((7, 3)))
    fused_ir, fused_vi = FusionMath.cross_attention_swap(f, f, AttentionWeights.seeded(3, seed=5))
    assert np.allclose(fused_ir.data, fused_vi.data)


def test_identity_weights_oracle():
    f_ir = FeatureMap([[1.0, 0.0], [0.0, 1.0]])
    f_vi = FeatureMap([[1.0, 0.0], [0.0, 1.0]])
    fused_ir, _ = FusionMath.cross_attention_swap(f_ir, f_vi, AttentionWeights.identity(2))
    a = np.exp(1 / np.sqrt(2))
    expected = np.array([[a, 1.0], [1.0, a]]) / (a + 1.0)
    assert np.allclose(fused_ir.data, expected), f"Expected {expected}, got {fused_ir.data}"


def test_query_permutation_permutes_output(rng):
    f_ir = FeatureMap(rng.standard_normal((5, 3)))
    f_vi = FeatureMap(rng.standard_normal((6, 3)))
    weights_ir, weights_vi = AttentionWeights.seeded(3, seed=1), AttentionWeights.seeded(3, seed=2)
    order = rng.permutation(6)
    base, _ = FusionMath.cross_attention_swap(f_ir, f_vi, weights_ir, weights_vi)
    permuted, _ = FusionMath.cross_attention_swap(f_ir, FeatureMap(f_vi.data[order]), weights_ir, weights_vi)
    assert np.allclose(permuted.data, base.data[order])


@pytest.mark.parametrize("seed", range(10))
def test_key_value_permutation_leaves_output_unchanged(seed):
    rng = np.random.default_rng(seed)
    f_ir = FeatureMap(rng.standard_normal((5, 3)))
    f_vi = FeatureMap(rng.standard_normal((6, 3)))
    weights_ir, weights_vi = AttentionWeights.seeded(3, seed=seed), AttentionWeights.seeded(3, seed=seed + 100)
    order = rng.permutation(5)
    base_ir, base_vi = FusionMath.cross_attention_swap(f_ir, f_vi, weights_ir, weights_vi)
    fused_ir, fused_vi = FusionMath.cross_attention_swap(FeatureMap(f_ir.data[order]), f_vi, weights_ir, weights_vi)
    assert np.allclose(fused_ir.data, base_ir.data, atol=1e-12), "Permuting key/value rows changed the output"
    assert np.allclose(fused_vi.data, base_vi.data[order], atol=1e-12)


def test_attention_dimension_errors(rng):
    weights = AttentionWeights.seeded(3)
    with pytest.raises(InvalidArgumentError):
        FusionMath.cross_attention_swap(FeatureMap(np.ones((2, 3))), FeatureMap(np.ones((2, 2))), weights)
    with pytest.raises(InvalidArgumentError):
        FusionMath.cross_attention_swap(FeatureMap(np.ones((2, 3))), FeatureMap(np.ones((2, 3))), AttentionWeights.seeded(2))
    with pytest.raises(InvalidArgumentError):
        FusionMath.cross_attention_swap(FeatureMap(np.ones((2, 0))), FeatureMap(np.ones((2, 0))), AttentionWeights.identity(0))
    with pytest.raises(InvalidArgumentError):
        AttentionWeights(np.eye(2), np.eye(3), np.eye(2))
    with pytest.raises(InvalidArgumentError):
        FeatureMap(np.ones(4))


def test_concat_and_split(rng, gray_scene):
    f_ir = FeatureMap.from_image(gray_scene)
    f_vi = FeatureMap(rng.standard_normal((f_ir.tokens, 3)))
    joined = FusionMath.concat_fuse(f_ir, f_vi)
    assert joined.dim == 4 and joined.tokens == 32 * 32
    left, right = joined.split(1)
    assert np.array_equal(left.data, f_ir.data) and np.array_equal(right.data, f_vi.data)
    empty = FeatureMap(np.zeros((f_ir.tokens, 0)))
    assert np.array_equal(FusionMath.concat_fuse(f_ir, empty).data, f_ir.data)
    with pytest.raises(InvalidArgumentError):
        FusionMath.concat_fuse(f_ir, FeatureMap(np.ones((3, 1))))


def test_modulation_identity_and_doubling(rng):
    f = FeatureMap(rng.standard_normal((4, 3)))
    assert np.array_equal(FusionMath.prompt_modulate(f, ModulationParams.identity(3)).data, f.data)
    doubled = FusionMath.prompt_modulate(f, ModulationParams(np.ones(3), np.zeros(3)))
    assert np.allclose(doubled.data, 2 * f.data)


def test_modulation_oracle(rng):
    f = FeatureMap(rng.standard_normal((5, 3)))
    gamma, beta = rng.standard_normal(3), rng.standard_normal(3)
    out = FusionMath.prompt_modulate(f, ModulationParams(gamma, beta)).data
    for t in range(5):
        for c in range(3):
            assert out[t, c] == pytest.approx((1 + gamma[c]) * f.data[t, c] + beta[c])


def test_modulation_composition(rng):
    f = FeatureMap(rng.standard_normal((6, 4)))
    first = ModulationParams(rng.standard_normal(4), rng.standard_normal(4))
    second = ModulationParams(rng.standard_normal(4), rng.standard_normal(4))
    sequential = FusionMath.prompt_modulate(FusionMath.prompt_modulate(f, first), second)
    combined = FusionMath.prompt_modulate(f, first.then(second))
    assert np.max(np.abs(sequential.data - combined.data)) < 1e-9


def test_modulation_errors(rng):
    with pytest.raises(InvalidArgumentError):
        ModulationParams(np.zeros(3), np.zeros(2))
    with pytest.raises(InvalidArgumentError):
        FusionMath.prompt_modulate(FeatureMap(np.ones((2, 3))), ModulationParams.identity(2))
    with pytest.raises(InvalidArgumentError):
        ModulationParams.identity(2).then(ModulationParams.identity(3))


def test_modulation_from_embedding():
    embedding = Embedding([1.0, 2.0])
    projection = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.0, 0.0]])
    params = ModulationParams.from_embedding(embedding, projection)
    assert params.gamma.tolist() == [1.0, 2.0]
    assert params.beta.tolist() == [3.0, 0.0]
    with pytest.raises(InvalidArgumentError):
        ModulationParams.from_embedding(embedding, np.ones((3, 2)))


def test_weights_json_round_trip(tmp_path):
    weights_ir, weights_vi = AttentionWeights.seeded(3, seed=1), AttentionWeights.seeded(3, seed=2)
    path = tmp_path / "weights.json"
    AttentionWeights.save_pair(weights_ir, weights_vi, str(path))
    loaded_ir, loaded_vi = AttentionWeights.load_pair(str(path))
    assert np.array_equal(loaded_ir.w_q, weights_ir.w_q)
    assert np.array_equal(loaded_vi.w_v, weights_vi.w_v)
    with pytest.raises(InvalidArgumentError):
        AttentionWeights.from_dict({"w_q": [[1.0]], "w_k": [[1.0]]})
