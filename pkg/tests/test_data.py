import numpy as np
import pytest

from gsmm.core import DataError
from gsmm.data import (
    TABLE_COUNTS,
    load_dataset,
    normalize_labels,
    parse_libsvm,
    take_subsample,
    to_feature_matrix,
    write_libsvm,
)

SAMPLE = "1 1:0.5 3:2.0\n-1 2:1.0\n"


# -- parse_libsvm -------------------------------------------------------------


def test_parse_basic():
    d = parse_libsvm(SAMPLE)
    assert d.n_samples == 2
    assert d.n_features == 3
    assert np.array_equal(d.labels, [1.0, -1.0])
    idx0, val0 = d.rows[0]
    assert list(idx0) == [1, 3] and list(val0) == [0.5, 2.0]
    idx1, val1 = d.rows[1]
    assert list(idx1) == [2] and list(val1) == [1.0]


def test_parse_skips_blanks_and_comments():
    d = parse_libsvm("# header\n\n1 1:1.0\n   \n# trailing\n-1 1:2.0\n")
    assert d.n_samples == 2


def test_parse_accepts_file_object(tmp_path):
    f = tmp_path / "t.libsvm"
    f.write_text(SAMPLE)
    with open(f) as fh:
        d = parse_libsvm(fh)
    assert d.n_samples == 2


def test_parse_declared_width():
    d = parse_libsvm(SAMPLE, n_features=10)
    assert d.n_features == 10
    with pytest.raises(DataError, match=r"declared n_features=2 but saw feature index 3"):
        parse_libsvm(SAMPLE, n_features=2)


@pytest.mark.parametrize(
    "text,msg",
    [
        ("abc 1:2.0", r"line 1, column 1: non-numeric label 'abc'"),
        ("1 foo", r"line 1, column 3: malformed feature token 'foo'"),
        ("1 x:2", r"line 1, column 3: non-integer feature index 'x'"),
        ("1 0:2", r"line 1, column 3: feature index must be >= 1, got 0"),
        ("1 2:1 2:3", r"line 1, column 7: duplicate feature index 2 after 2"),
        ("1 3:1 2:3", r"line 1, column 7: non-ascending feature index 2 after 3"),
        ("1 2:abc", r"line 1, column 5: non-numeric feature value 'abc'"),
        ("1 1:1\n-1 bad", r"line 2, column 4: malformed feature token 'bad'"),
    ],
)
def test_parse_errors_carry_position(text, msg):
    with pytest.raises(DataError, match=msg):
        parse_libsvm(text)


def test_roundtrip_is_lossless():
    d = parse_libsvm("1 1:0.1 2:1e-17 3:-3.5e300\n-1 4:6.02e23\n")
    d2 = parse_libsvm(write_libsvm(d))
    assert np.array_equal(d.labels, d2.labels)
    assert d.n_features == d2.n_features
    for (i1, v1), (i2, v2) in zip(d.rows, d2.rows):
        assert np.array_equal(i1, i2)
        assert np.array_equal(v1, v2)


def test_write_empty_dataset():
    assert write_libsvm(parse_libsvm("")) == ""


# -- normalize_labels ---------------------------------------------------------


def test_normalize_zero_one():
    d = normalize_labels(parse_libsvm("0 1:1\n1 1:2\n0 1:3\n"))
    assert np.array_equal(d.labels, [-1.0, 1.0, -1.0])
    assert d.label_map == {0.0: -1.0, 1.0: 1.0}


def test_normalize_one_two():
    d = normalize_labels(parse_libsvm("2 1:1\n1 1:2\n"))
    assert np.array_equal(d.labels, [1.0, -1.0])
    assert d.label_map == {1.0: -1.0, 2.0: 1.0}


def test_normalize_already_canonical():
    d = normalize_labels(parse_libsvm(SAMPLE))
    assert np.array_equal(d.labels, [1.0, -1.0])
    assert d.label_map == {-1.0: -1.0, 1.0: 1.0}


def test_normalize_rejects_wrong_cardinality():
    with pytest.raises(DataError, match="expected exactly two distinct labels, found 3"):
        normalize_labels(parse_libsvm("0 1:1\n1 1:1\n2 1:1\n"))
    with pytest.raises(DataError, match="found 1"):
        normalize_labels(parse_libsvm("1 1:1\n1 1:2\n"))


# -- take_subsample -----------------------------------------------------------


def labeled_by_value(n):
    # label equals the row's only feature value, so alignment is checkable
    text = "".join(f"{i} 1:{i}.0\n" for i in range(1, n + 1))
    return parse_libsvm(text)


def test_subsample_deterministic_and_ordered():
    d = labeled_by_value(40)
    s1 = take_subsample(d, 12, seed=7)
    s2 = take_subsample(d, 12, seed=7)
    assert np.array_equal(s1.labels, s2.labels)
    assert s1.n_samples == 12
    assert np.all(np.diff(s1.labels) > 0)  # original order kept
    s3 = take_subsample(d, 12, seed=8)
    assert not np.array_equal(s1.labels, s3.labels)


def test_subsample_keeps_rows_aligned_with_labels():
    s = take_subsample(labeled_by_value(40), 15, seed=3)
    for (_, val), lab in zip(s.rows, s.labels):
        assert val[0] == lab
    assert s.n_features == 1
    assert "take=15" in s.name or s.name == ""


def test_subsample_bounds():
    d = labeled_by_value(5)
    assert take_subsample(d, 5, seed=0).n_samples == 5
    with pytest.raises(DataError, match=r"\[1, 5\]"):
        take_subsample(d, 0, seed=0)
    with pytest.raises(DataError, match="got 6"):
        take_subsample(d, 6, seed=0)


# -- to_feature_matrix --------------------------------------------------------


def test_feature_matrix_values():
    mat, labels = to_feature_matrix(parse_libsvm(SAMPLE))
    assert mat.shape == (2, 3)
    assert mat.format == "csr"
    assert np.array_equal(mat.toarray(), [[0.5, 0.0, 2.0], [0.0, 1.0, 0.0]])
    assert np.array_equal(labels, [1.0, -1.0])


def test_feature_matrix_empty():
    mat, labels = to_feature_matrix(parse_libsvm(""))
    assert mat.shape == (0, 0)
    assert labels.size == 0


# -- load_dataset -------------------------------------------------------------


def test_bundled_datasets_match_table():
    for name in ("diabetes", "german"):
        d = load_dataset(name)
        assert (d.n_samples, d.n_features) == TABLE_COUNTS[name]
        assert set(np.unique(d.labels)) == {-1.0, 1.0}
        assert d.name == name


def test_load_from_explicit_path(tmp_path):
    f = tmp_path / "mini.libsvm"
    f.write_text("0 1:1.0\n1 2:2.0\n")
    d = load_dataset(f)
    assert d.n_samples == 2
    assert d.name == "mini"


def test_count_mismatch_rejected(tmp_path):
    f = tmp_path / "diabetes"
    f.write_text("0 1:1.0\n1 2:2.0\n")
    with pytest.raises(DataError, match="expected 768 samples x 8 features"):
        load_dataset(f)
    d = load_dataset(f, check_counts=False)
    assert d.n_samples == 2


def test_missing_dataset_points_at_fetch_script(monkeypatch):
    monkeypatch.delenv("GSMM_DATA_DIR", raising=False)
    with pytest.raises(DataError, match="fetch_datasets.sh"):
        load_dataset("w8a")


def test_data_dir_and_env_resolution(tmp_path, monkeypatch):
    (tmp_path / "mini").write_text("0 1:1.0\n1 1:2.0\n")
    d = load_dataset("mini", data_dir=tmp_path)
    assert d.n_samples == 2

    monkeypatch.setenv("GSMM_DATA_DIR", str(tmp_path))
    d = load_dataset("mini")
    assert d.n_samples == 2

    # explicit data_dir wins over the environment
    other = tmp_path / "other"
    other.mkdir()
    (other / "mini").write_text("0 1:1.0\n1 1:2.0\n0 1:3.0\n")
    assert load_dataset("mini", data_dir=other).n_samples == 3
