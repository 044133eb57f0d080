import numpy as np
import pytest

from indetermination import (
    InvalidDistribution,
    JointDistribution,
    Margin,
)
from indetermination.continuous import DensityKind, DensitySpec
from indetermination.io import (
    density_from_dict,
    read_density_json,
    read_graph_csv,
    read_joint_json,
    read_margin_csv,
    read_matrix_csv,
    read_vector_csv,
    write_density_json,
    write_joint_json,
    write_matrix_csv,
    write_vector_csv,
)


class TestMatrixCsv:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        m = rng.random((4, 3))
        path = tmp_path / "m.csv"
        write_matrix_csv(path, m)
        np.testing.assert_array_equal(read_matrix_csv(path), m)

    def test_single_row_stays_2d(self, tmp_path):
        path = tmp_path / "row.csv"
        write_matrix_csv(path, [[1.0, 2.0, 3.0]])
        assert read_matrix_csv(path).shape == (1, 3)

    def test_header_toggle(self, tmp_path):
        path = tmp_path / "h.csv"
        write_matrix_csv(path, [[1.0, 2.0]], header=True)
        assert path.read_text().splitlines()[0] == "c0,c1"
        np.testing.assert_array_equal(read_matrix_csv(path, header=True), [[1.0, 2.0]])

    def test_garbage_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\nc,d\n")
        with pytest.raises(InvalidDistribution):
            read_matrix_csv(path)


class TestVectorAndMargin:
    def test_vector_round_trip(self, tmp_path):
        path = tmp_path / "v.csv"
        write_vector_csv(path, [0.25, 0.75])
        np.testing.assert_array_equal(read_vector_csv(path), [0.25, 0.75])

    def test_margin_from_column_layout(self, tmp_path):
        path = tmp_path / "col.csv"
        path.write_text("0.25\n0.75\n")
        m = read_margin_csv(path)
        assert isinstance(m, Margin)
        np.testing.assert_array_equal(m.weights, [0.25, 0.75])


class TestJointJson:
    def test_round_trip(self, tmp_path, ref_cells):
        pi = JointDistribution(ref_cells)
        path = tmp_path / "pi.json"
        write_joint_json(path, pi)
        back = read_joint_json(path)
        np.testing.assert_array_equal(back.cells, pi.cells)
        np.testing.assert_array_equal(back.row_margin.weights, pi.row_margin.weights)

    def test_cells_only(self, tmp_path):
        path = tmp_path / "pi.json"
        path.write_text('{"cells": [[0.5, 0.0], [0.0, 0.5]]}')
        back = read_joint_json(path)
        np.testing.assert_array_equal(back.col_margin.weights, [0.5, 0.5])


class TestDensityJson:
    def test_round_trip(self, tmp_path):
        spec = DensitySpec.piecewise_linear([0.0, 1.0], [0.5, 1.5])
        path = tmp_path / "f.json"
        write_density_json(path, spec)
        back = read_density_json(path)
        assert back.kind is DensityKind.PIECEWISE_LINEAR
        np.testing.assert_array_equal(back.knots, spec.knots)
        np.testing.assert_array_equal(back.values, spec.values)

    def test_support_mismatch_rejected(self):
        with pytest.raises(InvalidDistribution):
            density_from_dict({
                "kind": "piecewise_constant",
                "support": [0.0, 2.0],
                "knots": [0.0, 1.0],
                "values": [1.0],
            })


class TestGraphCsv:
    def test_edge_list(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("0,1,1\n1,2,2\n")
        g = read_graph_csv(path)
        assert g.n == 3
        assert g.a[2, 1] == 2.0
        assert g.two_m == 6.0

    def test_wrong_width_rejected(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("0,1\n")
        with pytest.raises(InvalidDistribution):
            read_graph_csv(path)
