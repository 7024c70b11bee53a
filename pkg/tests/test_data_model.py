import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fibered.data_model import (ConfigError, Dataset, DatasetError, Frame, PersistenceDiagram,
                                PipelineConfig, load_dataset, read_matrix_csv, seeded_rng,
                                write_matrix_csv)


def test_load_three_point_distances(tmp_path):
    d = np.array([[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]])
    write_matrix_csv(tmp_path / "d.csv", d)
    write_matrix_csv(tmp_path / "b.csv", np.zeros((3, 2)))
    data = load_dataset(distances_path=tmp_path / "d.csv", base_path=tmp_path / "b.csv")
    assert data.n_points == 3
    np.testing.assert_array_equal(data.distances, d)


def test_points_only_gives_euclidean(tmp_path):
    (tmp_path / "p.csv").write_text("x,y\n0,0\n3,4\n")
    (tmp_path / "b.csv").write_text("0\n1\n")
    data = load_dataset(points_path=tmp_path / "p.csv", base_path=tmp_path / "b.csv")
    assert data.distances[0, 1] == 5.0


def test_asymmetric_rejected(tmp_path):
    (tmp_path / "d.csv").write_text("0,1\n2,0\n")
    (tmp_path / "b.csv").write_text("0\n1\n")
    with pytest.raises(DatasetError, match="asymmetric"):
        load_dataset(distances_path=tmp_path / "d.csv", base_path=tmp_path / "b.csv")


def test_row_mismatch_names_row(tmp_path):
    (tmp_path / "p.csv").write_text("0,0\n1,1,1\n")
    with pytest.raises(DatasetError, match="row 1"):
        read_matrix_csv(tmp_path / "p.csv", "points")


def test_base_row_count_checked():
    with pytest.raises(DatasetError, match="base map has 2 rows"):
        Dataset(np.zeros((3, 3)), np.zeros((2, 1)))


def test_non_euclidean_metric_accepted():
    pts = np.array([[0.0, 0], [1, 0], [0, 1]])
    d = np.array([[0, 5, 5], [5, 0, 5], [5, 5, 0.0]])
    data = Dataset(d, pts, points=pts)
    assert data.distances[0, 1] == 5


def test_frame_gram_check():
    Frame(np.eye(3)[:, :2])
    with pytest.raises(ValueError, match="orthonormal"):
        Frame(np.array([[1.0, 0], [0, 1 + 1e-6]]))
    with pytest.raises(ValueError):
        Frame(np.ones((2, 3)))


def test_frame_is_read_only():
    f = Frame(np.eye(2))
    with pytest.raises(ValueError):
        f.entries[0, 0] = 2


def test_seeded_rng_streams():
    a = seeded_rng(0, "x").random(5)
    b = seeded_rng(0, "x").random(5)
    c = seeded_rng(0, "y").random(5)
    d = seeded_rng(1, "x").random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
    assert not np.allclose(a, d)


@given(st.integers(min_value=0, max_value=2**64 - 1))
def test_seeded_rng_any_seed(seed):
    v = seeded_rng(seed, "s").random()
    assert 0 <= v < 1


def test_config_validation():
    with pytest.raises(ConfigError):
        PipelineConfig(fiber_scale=1.0)
    with pytest.raises(ConfigError):
        PipelineConfig(k=1)
    with pytest.raises(ConfigError):
        PipelineConfig(d=1, e=2)
    with pytest.raises(ConfigError, match="unknown config keys"):
        PipelineConfig.from_dict({"kk": 3})
    cfg = PipelineConfig(d=3)
    assert cfg.fiber_rank == 2
    assert PipelineConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.digest() == PipelineConfig(d=3).digest() != PipelineConfig(d=2).digest()


def test_persistence_diagram_json_roundtrip():
    pd = PersistenceDiagram(3, ((1, 0.5, 1.0), (0, 0.0, np.inf)))
    back = PersistenceDiagram.from_json(3, pd.to_json())
    assert back == pd
    assert pd.to_json()[0]["infinite"] is True
    with pytest.raises(ValueError):
        PersistenceDiagram(2, ((1, 1.0, 1.0),))
    with pytest.raises(ValueError):
        PersistenceDiagram(5, ())
