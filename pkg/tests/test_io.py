import numpy as np
import pytest
from hypothesis import given

from multiplexgm.errors import ParseError, UnionIncomplete, ValidationError
from multiplexgm.io import (
    format_mx,
    parse_mx,
    read_hard_seeds,
    read_mx,
    read_soft_seeds,
    read_truth,
    write_mx,
    write_truth,
)

from test_multiplex import multiplexes


def test_parse_basic():
    g = parse_mx("# demo\n3 2\n1 1 2\n2 2 3\nV 2 1\n")
    assert g.n_total == 3 and g.c == 2
    assert g.channels[0].edges == {(0, 1)}
    assert g.channels[1].vertices == {0, 1, 2}
    assert g.channels[0].vertices == {0, 1}


@pytest.mark.parametrize("text, exc", [
    ("", ParseError),
    ("3\n", ParseError),
    ("3 x\n", ParseError),
    ("3 1\n1 1\n", ParseError),
    ("3 1\n2 1 2\n", ParseError),
    ("3 1\n1 1 2\n", UnionIncomplete),
    ("2 1\n1 a 2\n", ParseError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_mx(text)


@given(multiplexes())
def test_format_roundtrip(g):
    assert parse_mx(format_mx(g)) == g


def test_file_roundtrips(tmp_path):
    g = parse_mx("4 1\n1 1 2\n1 3 4\n")
    write_mx(g, tmp_path / "g.mx")
    assert read_mx(tmp_path / "g.mx") == g
    truth = np.array([3, 0, 2])
    write_truth(truth, tmp_path / "t.truth")
    assert np.array_equal(read_truth(tmp_path / "t.truth"), truth)


def test_truth_must_be_complete(tmp_path):
    (tmp_path / "t").write_text("1 2\n3 1\n")
    with pytest.raises(ParseError):
        read_truth(tmp_path / "t")


def test_hard_seeds(tmp_path):
    (tmp_path / "h").write_text("# seeds\n1 5\n2 3\n")
    assert read_hard_seeds(tmp_path / "h") == {0: 4, 1: 2}
    (tmp_path / "h").write_text("1 5\n1 3\n")
    with pytest.raises(ParseError):
        read_hard_seeds(tmp_path / "h")


def test_soft_seeds(tmp_path):
    (tmp_path / "s.csv").write_text("template,background,weight\n1,1,3\n1,2,1\n3,4,2\n")
    S = read_soft_seeds(tmp_path / "s.csv", 3, 4)
    assert np.allclose(S[0], [0.75, 0.25, 0, 0])
    assert np.allclose(S[1], 0.25)
    assert np.allclose(S[2], [0, 0, 0, 1])
    (tmp_path / "bad.csv").write_text("1,9,1\n")
    with pytest.raises(ParseError):
        read_soft_seeds(tmp_path / "bad.csv", 3, 4)
    (tmp_path / "neg.csv").write_text("1,1,-1\n")
    with pytest.raises(ValidationError):
        read_soft_seeds(tmp_path / "neg.csv", 3, 4)
