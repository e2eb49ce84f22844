import pytest
from hypothesis import given, strategies as st

from cgpl.errors import CgplIOError, DslSyntaxError, EmptySelection
from cgpl.model import ProductConfig
from cgpl.pcl import find_pcl, format_pcl, parse_pcl, read_pcl

from conftest import CORPUS
from generators import random_pcl_model


def test_list_two():
    cfg = read_pcl(CORPUS / "FactoryGenerator.pcl")
    assert cfg == ProductConfig("FactoryGenerator", ("factoryVariant",), "gen")


def test_output_defaults_to_gen():
    cfg = parse_pcl('generator G { layers = "a", "b"; }')
    assert cfg.output_dir is None and cfg.output == "gen"
    assert cfg.selected_layers == ("a", "b")


def test_empty_selection():
    with pytest.raises(EmptySelection):
        parse_pcl('generator G { layers = ""; }')


@pytest.mark.parametrize("text", [
    'generator G { layers = "a", "a"; }',
    'generator G { layers = "a", ""; }',
    'generator G { layers = ; }',
    'generator G { output = "x"; }',
    'generator G { layers = "a" }',
    'generator { layers = "a"; }',
    'generator G { layers = "a"; } extra',
    'generator G { layers = "a"; output = "x"; }',
    'generator G { layers = "unterminated; }',
])
def test_syntax_errors(text):
    with pytest.raises(DslSyntaxError) as exc:
        parse_pcl(text)
    assert exc.value.span is not None


def test_error_position_and_expected_set():
    with pytest.raises(DslSyntaxError) as exc:
        parse_pcl('generator G {\n  output = "x"\n  layers = "a";\n}')
    assert (exc.value.span.start_line, exc.value.span.start_col) == (3, 3)
    assert exc.value.expected == ("';'",)


def test_escapes_round_trip():
    cfg = ProductConfig("G", ('we"ird\\name', "ok"), "out dir/x")
    assert parse_pcl(format_pcl(cfg)) == cfg


@given(st.randoms(use_true_random=False))
def test_round_trip_hypothesis(rng):
    cfg = random_pcl_model(rng)
    text = format_pcl(cfg)
    assert parse_pcl(text) == cfg
    assert format_pcl(parse_pcl(text)) == text


def test_find_pcl(tmp_path):
    assert find_pcl(CORPUS).name == "FactoryGenerator.pcl"
    with pytest.raises(CgplIOError):
        find_pcl(tmp_path)
    (tmp_path / "a.pcl").write_text("x")
    (tmp_path / "b.pcl").write_text("x")
    with pytest.raises(CgplIOError):
        find_pcl(tmp_path)


def test_read_missing(tmp_path):
    with pytest.raises(CgplIOError):
        read_pcl(tmp_path / "none.pcl")
