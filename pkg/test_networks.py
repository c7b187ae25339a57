"""
Tests layer shapes of the generator and discriminator, the condition
vector, the component and style encoders, and gradients.
"""

import copy

import pytest
import torch
import torch.nn as nn

from src.components.dictionary import ComponentRangeError
from src.errors import ShapeError
from src.networks.config import MODE_PRESETS, ModelConfig, resolve_mode
from src.networks.discriminator import Discriminator
from src.networks.encoders import (
    ComponentEncoder,
    ImageEncoder,
    InvalidSequenceError,
    StyleEncoder,
    StyleRangeError,
    style_vector,
)
from src.networks.generator import Generator
from src.errors import ConfigurationError

ENCODER_SHAPES = [
    (64, 128, 128), (128, 64, 64), (256, 32, 32), (512, 16, 16),
    (512, 8, 8), (512, 4, 4), (512, 2, 2), (512, 1, 1),
]
DECODER_SHAPES = [
    (512, 2, 2), (512, 4, 4), (512, 8, 8), (512, 16, 16),
    (256, 32, 32), (128, 64, 64), (64, 128, 128), (1, 256, 256),
]
DISCRIMINATOR_SHAPES = [(64, 256, 256), (128, 128, 128), (256, 64, 64)]


def glyph_batch(batch=2, seed=0):
    gen = torch.Generator().manual_seed(seed)
    return torch.rand(batch, 1, 256, 256, generator=gen) * 2 - 1


def component_inputs(generator, sequences):
    return generator.component_encoder.pack(sequences)


@pytest.fixture(scope="module")
def full_generator():
    torch.manual_seed(0)
    return Generator(ModelConfig())


def test_encoder_layer_shapes():
    torch.manual_seed(0)
    encoder = ImageEncoder(64)
    h = glyph_batch()
    for block, expected in zip(encoder.blocks, ENCODER_SHAPES):
        h = block(h)
        assert tuple(h.shape[1:]) == expected
    features, skips = encoder(glyph_batch())
    assert features.shape == (2, 512)
    assert [tuple(s.shape[1:]) for s in skips] == ENCODER_SHAPES[:7]


def test_generator_layer_shapes(full_generator):
    x = glyph_batch()
    styles = torch.tensor([1, 7])
    ids, lengths = component_inputs(full_generator, [(46, 48, 81), (3, 517)])

    features, skips = full_generator.image_encoder(x)
    condition = full_generator.condition(features, styles, ids, lengths)
    assert condition.shape == (2, 775)

    trace = []
    out = full_generator.decoder(condition, skips, trace=trace)
    assert [tuple(t.shape[1:]) for t in trace] == DECODER_SHAPES
    assert out.shape == (2, 1, 256, 256)
    assert out.min() >= -1.0 and out.max() <= 1.0


def test_discriminator_layer_shapes():
    torch.manual_seed(0)
    disc = Discriminator(ModelConfig())
    trace = []
    out = disc(glyph_batch(), glyph_batch(seed=1), trace=trace)
    assert [tuple(t.shape[1:]) for t in trace] == DISCRIMINATOR_SHAPES
    assert out.realness.shape == (2,)
    assert out.style_logits.shape == (2, 7)


@pytest.mark.parametrize("style_mode, components, expected", [
    ("onehot", True, 775),
    ("onehot", False, 519),
    ("disabled", True, 768),
    ("disabled", False, 512),
    ("embedding", True, 896),
    ("embedding", False, 640),
])
def test_condition_length(style_mode, components, expected):
    cfg = ModelConfig(style_mode=style_mode, components_enabled=components)
    assert cfg.condition_dim == expected


def test_generator_without_component_encoder():
    torch.manual_seed(0)
    gen = Generator(ModelConfig(components_enabled=False, generator_filters=8))
    assert gen.component_encoder is None
    out = gen(glyph_batch(), torch.tensor([2, 3]))
    assert out.image.shape == (2, 1, 256, 256)
    assert out.features.shape == (2, 64)


def test_generator_requires_component_ids_when_enabled():
    gen = Generator(ModelConfig(generator_filters=8))
    with pytest.raises(ShapeError):
        gen(glyph_batch(), torch.tensor([1, 2]))


def test_wrong_input_shape_is_rejected():
    encoder = ImageEncoder(8)
    with pytest.raises(ShapeError):
        encoder(torch.zeros(2, 1, 128, 128))


def test_mode_presets():
    assert resolve_mode("proposed") == ("onehot", True)
    assert resolve_mode("baseline") == ("embedding", False)
    assert set(MODE_PRESETS) >= {"proposed", "onehot", "components", "baseline", "single-style"}
    with pytest.raises(ConfigurationError):
        resolve_mode("nope")


# --- component encoder ---

def test_component_encoder_output_and_padding_independence():
    torch.manual_seed(0)
    encoder = ComponentEncoder(vocab_size=20, embedding_dim=8, hidden=16).eval()
    alone = encoder.encode([(3, 4)])
    batched = encoder.encode([(3, 4), (1, 2, 5, 6, 7, 8)])
    assert batched.shape == (2, 16)
    torch.testing.assert_close(alone[0], batched[0], rtol=1e-5, atol=1e-6)


def test_component_order_matters():
    torch.manual_seed(0)
    encoder = ComponentEncoder(vocab_size=20, embedding_dim=8, hidden=16)
    v = encoder.encode([(1, 2, 3), (3, 2, 1)])
    assert not torch.allclose(v[0], v[1])


def test_component_encoder_rejects_bad_sequences():
    encoder = ComponentEncoder(vocab_size=20)
    with pytest.raises(InvalidSequenceError):
        encoder.pack([()])
    with pytest.raises(ComponentRangeError):
        encoder.pack([(1, 21)])


# --- style encoder ---

def test_onehot_style_vector():
    encoder = StyleEncoder(7, "onehot")
    v = style_vector(3, encoder)
    assert v.tolist() == [0, 0, 1, 0, 0, 0, 0]


def test_embedding_and_disabled_style_vectors():
    assert StyleEncoder(7, "embedding", 16)(torch.tensor([1, 7])).shape == (2, 16)
    assert StyleEncoder(7, "disabled")(torch.tensor([1, 7])).shape == (2, 0)


@pytest.mark.parametrize("label", [0, 8])
def test_style_out_of_range(label):
    with pytest.raises(StyleRangeError):
        StyleEncoder(7, "onehot")(torch.tensor([label]))


# --- data flow ---

def test_output_depends_on_each_skip(full_generator):
    """Perturbing any single skip activation changes the generated image."""
    full_generator.eval()
    x = glyph_batch(batch=1)
    ids, lengths = component_inputs(full_generator, [(1, 2)])
    with torch.no_grad():
        features, skips = full_generator.image_encoder(x)
        condition = full_generator.condition(features, torch.tensor([1]), ids, lengths)
        base = full_generator.decoder(condition, skips)
        for i in range(7):
            changed = list(skips)
            changed[i] = skips[i] + 1.0
            assert not torch.allclose(full_generator.decoder(condition, changed), base)
    full_generator.train()


def test_style_label_changes_output():
    torch.manual_seed(0)
    gen = Generator(ModelConfig(generator_filters=8, components_enabled=False)).eval()
    x = glyph_batch(batch=1)
    with torch.no_grad():
        a = gen(x, torch.tensor([1])).image
        b = gen(x, torch.tensor([2])).image
    assert not torch.allclose(a, b)


def test_discriminator_heads_are_independent():
    torch.manual_seed(0)
    disc = Discriminator(ModelConfig(discriminator_filters=8))
    out = disc(glyph_batch(), glyph_batch(seed=1))
    out.style_logits.sum().backward()
    assert disc.realness_head.weight.grad is None
    assert disc.style_head.weight.grad is not None
    assert disc.trunk[0][0].weight.grad is not None


def test_weight_initialization():
    torch.manual_seed(0)
    gen = Generator(ModelConfig())
    conv = gen.image_encoder.blocks[1][0].weight
    bn = gen.image_encoder.blocks[1][1].weight
    assert abs(conv.mean().item()) < 0.005
    assert abs(conv.std().item() - 0.02) < 0.002
    assert abs(bn.mean().item() - 1.0) < 0.01


def test_gradient_matches_finite_differences():
    """Float32 autodiff of one output pixel of three encoder blocks against float64 central differences."""
    torch.manual_seed(0)
    model = nn.Sequential(*ImageEncoder(8).blocks[:3]).eval()
    x = torch.rand(1, 1, 32, 32) * 2 - 1
    pixel = (0, 5, 2, 2)

    model(x)[pixel].backward()

    reference = copy.deepcopy(model).double()
    x64 = x.double()
    params = dict(model.named_parameters())
    ref_params = dict(reference.named_parameters())

    # last-block parameters of other channels have exactly zero gradient
    candidates = [(name, i) for name, p in params.items()
                  for i in range(p.numel()) if abs(p.grad.view(-1)[i].item()) > 1e-4]
    gen = torch.Generator().manual_seed(1)
    picks = torch.randperm(len(candidates), generator=gen)[:10].tolist()
    assert len(picks) == 10

    h = 1e-6
    for k in picks:
        name, i = candidates[k]
        flat = ref_params[name].data.view(-1)
        original = flat[i].item()
        with torch.no_grad():
            flat[i] = original + h
            up = reference(x64)[pixel].item()
            flat[i] = original - h
            down = reference(x64)[pixel].item()
            flat[i] = original
        numeric = (up - down) / (2 * h)
        analytic = params[name].grad.view(-1)[i].item()
        assert abs(analytic - numeric) <= 1e-2 * max(abs(numeric), abs(analytic)) + 1e-6
