import numpy as np
import pytest

from treecert.data import DataError, Dataset, format_libsvm, normalize, parse_libsvm, stratified_split


def test_parse_examples():
    D = parse_libsvm("# comment\n+1\n-1 2:4.5\n+1 1:12 2:7  # trailing\n")
    assert D.X.tolist() == [[0, 0], [0, 4.5], [12, 7]]
    assert list(D.y) == [1, -1, 1] and isinstance(D.y[0], int)


def test_round_trip():
    D = Dataset([[0, 1.5], [2, 0]], [1, 0])
    assert parse_libsvm(format_libsvm(D)).X.tolist() == D.X.tolist()


@pytest.mark.parametrize("text,msg", [
    ("1 0:3\n", "<string>:1: feature index 0"),
    ("1 1:2 1:3\n", "duplicate"),
    ("1 1:x\n", "<string>:1: malformed"),
    ("\n# nothing\n", "empty"),
])
def test_parse_errors(text, msg):
    with pytest.raises(DataError, match=msg):
        parse_libsvm(text)


def test_padding():
    D = parse_libsvm("1 1:1\n")
    assert D.with_dimension(3).X.tolist() == [[1, 0, 0]]
    with pytest.raises(DataError):
        D.with_dimension(0)


def test_normalize():
    D, sc = normalize(Dataset([[2, 5], [4, 5], [6, 5]], [0, 1, 0]))
    assert D.X[:, 0].tolist() == [0, 0.5, 1] and D.X[:, 1].tolist() == [0, 0, 0]
    assert sc.invert(D.X)[:, 0].tolist() == [2, 4, 6]


def test_stratified_split_keeps_proportions():
    D = Dataset(np.arange(100).reshape(-1, 1), [1] * 60 + [0] * 40)
    tr, te = stratified_split(D, 0.8, seed=0)
    assert (list(tr.y).count(1), list(tr.y).count(0)) == (48, 32)
    assert (list(te.y).count(1), list(te.y).count(0)) == (12, 8)
    again = stratified_split(D, 0.8, seed=0)[1]
    assert te.X.tolist() == again.X.tolist()


def test_split_rejects_singleton_class():
    with pytest.raises(DataError):
        stratified_split(Dataset([[0], [1], [2]], [1, 1, 0]))
