import json

import numpy as np
import pytest

from regimbalance.io import (
    CsvDatasetSpec,
    DataError,
    abalone_like_dataset,
    dumps_report,
    load_csv_dataset,
    load_predictions,
    report_meta,
)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def rows(n=12):
    return "".join(f"{'ab'[i % 2]},{i},{2 * i}\n" for i in range(n))


def test_one_hot_and_target_by_name(tmp_path):
    p = write(tmp_path, "kind,x,y\n" + rows())
    d = load_csv_dataset(CsvDatasetSpec(p, "y", categorical_columns=("kind",)))
    assert d.feature_names == ("kind=a", "kind=b", "x")
    np.testing.assert_array_equal(d.features[:2], [[1, 0, 0], [0, 1, 1]])
    np.testing.assert_array_equal(d.targets[:3], [0, 2, 4])


def test_target_by_index_and_headerless(tmp_path):
    p = write(tmp_path, rows())
    d = load_csv_dataset(CsvDatasetSpec(p, 2, feature_columns=["c1"], has_header=False))
    assert d.features.shape == (12, 1) and d.targets[-1] == 22


def test_missing_values_dropped(tmp_path):
    p = write(tmp_path, "kind,x,y\n" + rows() + "a,NA,3\nb,4,?\n")
    d = load_csv_dataset(CsvDatasetSpec(p, "y", categorical_columns=("kind",)))
    assert len(d) == 12


def test_errors_report_row_numbers(tmp_path):
    p = write(tmp_path, "kind,x,y\n" + rows() + "\n" + "a,1,zz\n")
    with pytest.raises(DataError, match="row 15"):
        load_csv_dataset(CsvDatasetSpec(p, "y", categorical_columns=("kind",)))
    with pytest.raises(DataError, match="not found"):
        load_csv_dataset(CsvDatasetSpec(p, "nope"))
    with pytest.raises(DataError, match="need 10"):
        load_csv_dataset(CsvDatasetSpec(write(tmp_path, "x,y\n1,2\n", "s.csv"), "y"))
    with pytest.raises(DataError):
        load_csv_dataset(CsvDatasetSpec(tmp_path / "absent.csv", "y"))


def test_predictions_file(tmp_path):
    p = write(tmp_path, "y_true,y_pred\n1,2\n3,3\n")
    ps = load_predictions(p)
    assert ps.y_true.tolist() == [1, 3] and ps.y_pred.tolist() == [2, 3]
    with pytest.raises(DataError):
        load_predictions(write(tmp_path, "a,b\n1,2\n", "bad.csv"))


def test_report_meta_and_serialization():
    meta = report_meta(3, {"b": 1, "a": [0.1, 2]})
    assert meta["seed"] == 3 and len(meta["config_hash"]) == 64
    assert report_meta(3, {"a": [0.1, 2], "b": 1})["config_hash"] == meta["config_hash"]
    text = dumps_report(meta, {"x": np.float64(0.1), "n": np.int64(2), "none": None, "bad": float("nan")})
    obj = json.loads(text)
    assert obj["x"] == 0.1 and obj["n"] == 2 and obj["none"] is None and obj["bad"] is None


def test_abalone_like_dataset():
    d = abalone_like_dataset(0, n=300)
    assert d.features.shape == (300, 10)
    assert d.feature_names[:3] == ("sex=F", "sex=I", "sex=M")
