"""Tests for network specs and the template format."""

import pytest

from asmlab.exceptions import ConfigurationError, FormatError
from asmlab.nets.network import infer_shapes
from asmlab.nets.spec import (
    TEMPLATES,
    LayerSpec,
    NetworkSpec,
    discriminator_spec,
    format_spec,
    load_template,
    parse_spec,
    regularizer_spec,
    validate_spec,
)


class TestTemplates:
    """Tests for the shipped templates."""

    @pytest.mark.parametrize("name", TEMPLATES)
    def test_template_shapes(self, name):
        """Each layer's channels follow its declared width; heads come back at input extent."""
        spec = load_template(name)
        shapes = infer_shapes(spec, (64, 64))
        for layer in spec.layers:
            assert shapes[layer.name][0] == layer.channels
        for head in spec.heads:
            assert shapes[head.name][1:] == (64, 64)

    @pytest.mark.parametrize("name", TEMPLATES)
    def test_width_divisor(self, name):
        """The divisor shrinks every non-head layer and keeps head widths."""
        full = load_template(name)
        reduced = load_template(name, width_divisor=4)
        for a, b in zip(full.layers, reduced.layers):
            expected = a.channels if a.is_head else max(1, a.channels // 4)
            assert b.channels == expected
            assert b.connections == a.connections

    def test_semantic_analyzer_widths(self):
        """The semantic analyzer reads and writes 21 class maps."""
        spec = load_template("semantic_analyzer")
        assert spec.inputs == (("input", 21),)
        assert [layer.channels for layer in spec.layers] == [128, 256, 256, 256, 128, 21]

    def test_joint_analyzer_has_two_inputs(self):
        spec = load_template("joint_geometry_analyzer")
        assert spec.input_names == ("input_depth", "input_normal")
        assert spec.taps == ("conv1_1", "conv1_2", "conv2")
        assert [h.name for h in spec.heads] == ["output_depth", "output_normal"]

    def test_geometry_predictor_repeats(self):
        """Decoder blocks of the geometry predictor hold three convolutions each."""
        spec = load_template("geometry_predictor")
        assert sum(layer.repeat for layer in spec.layers) == 9 + 8 * 3 + 1

    def test_unknown_template(self):
        with pytest.raises(ConfigurationError):
            load_template("resnet")


class TestTemplateFormat:
    """Tests for parse_spec / format_spec."""

    @pytest.mark.parametrize("name", TEMPLATES)
    def test_format_parse_identity(self, name):
        spec = load_template(name)
        assert parse_spec(format_spec(spec)) == spec

    def test_wrong_column_count(self):
        with pytest.raises(FormatError):
            parse_spec("conv1\tinput\t3\t8\n")

    def test_non_integer_kernel(self):
        with pytest.raises(FormatError):
            parse_spec("conv1\tinput\tx\t8\t1\t1\t0\n")

    def test_bad_directive(self):
        with pytest.raises(FormatError):
            parse_spec("#! role critic\n")

    def test_comments_kept_aside(self):
        """Plain comments are carried but do not affect equality."""
        text = "# note\noutput\tinput\t1\t1\t1\t1\t0\n"
        spec = parse_spec(text)
        assert spec.comments == ("note",)
        assert spec == parse_spec("output\tinput\t1\t1\t1\t1\t0\n")


class TestValidation:
    """Tests for validate_spec."""

    def test_forward_reference_rejected(self):
        """A layer may only read inputs or earlier layers."""
        spec = NetworkSpec(
            layers=(
                LayerSpec("conv1", ("conv2",), 3, 4),
                LayerSpec("conv2", ("input",), 3, 4),
                LayerSpec("output", ("conv2",), 1, 1),
            )
        )
        with pytest.raises(ConfigurationError) as exc_info:
            validate_spec(spec)
        assert exc_info.value.context["layer"] == "conv1"

    def test_even_kernel_rejected(self):
        spec = NetworkSpec(layers=(LayerSpec("output", ("input",), 2, 1),))
        with pytest.raises(ConfigurationError):
            validate_spec(spec)

    def test_missing_head_rejected(self):
        spec = NetworkSpec(layers=(LayerSpec("conv1", ("input",), 3, 4),))
        with pytest.raises(ConfigurationError):
            validate_spec(spec)

    def test_analyzer_needs_taps(self):
        spec = NetworkSpec(layers=(LayerSpec("output", ("input",), 1, 1),), role="analyzer")
        with pytest.raises(ConfigurationError):
            validate_spec(spec)

    def test_unknown_tap_rejected(self, tiny_spec):
        with pytest.raises(ConfigurationError):
            validate_spec(tiny_spec.with_taps(("conv9",)))

    def test_strided_decoder_rejected(self):
        spec = NetworkSpec(
            layers=(
                LayerSpec("conv1", ("input",), 3, 4, stride=2),
                LayerSpec("output", ("conv1",), 1, 1, stride=2, upsample=True),
            )
        )
        with pytest.raises(ConfigurationError):
            validate_spec(spec)

    def test_concat_extent_mismatch(self):
        """Concatenating maps of different extent fails shape inference."""
        spec = NetworkSpec(
            layers=(
                LayerSpec("conv1", ("input",), 3, 4, stride=2),
                LayerSpec("output", ("conv1", "input"), 1, 1),
            )
        )
        with pytest.raises(ConfigurationError):
            infer_shapes(spec, (8, 8))


class TestDerivedSpecs:
    """Tests for regularizer and discriminator specs."""

    def test_regularizer_heads(self):
        spec = regularizer_spec(32, {"output_depth": 1, "output_normal": 3}, width=8)
        assert spec.role == "regularizer"
        assert spec.inputs == (("input", 32),)
        assert [(h.name, h.channels) for h in spec.heads] == [
            ("output_depth", 1),
            ("output_normal", 3),
        ]

    def test_regularizer_restores_extent(self):
        """Upsampling heads resize tap features to the requested target extent."""
        spec = regularizer_spec(16, {"output": 4})
        shapes = infer_shapes(spec, (16, 16))
        assert shapes["rec2"] == (16, 16, 16)

    def test_discriminator_keeps_encoder(self):
        """The critic is the analyzer encoder, a global pool and one logit."""
        analyzer = load_template("desk_analyzer")
        spec = discriminator_spec(analyzer, in_channels=5)
        assert spec.layer_names == ("conv1", "conv2", "conv3", "output")
        assert spec.global_pool
        assert spec.inputs == (("input", 5),)
        assert infer_shapes(spec, (32, 32))["output"] == (1, 1, 1)

    def test_discriminator_rewires_joint_inputs(self):
        """Both joint inputs collapse into the single critic input."""
        spec = discriminator_spec(load_template("joint_geometry_analyzer"), in_channels=4)
        assert spec.layer("conv1_1").connections == ("input",)
        assert spec.layer("conv1_2").connections == ("input",)
