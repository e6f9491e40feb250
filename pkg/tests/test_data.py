import numpy as np
import pytest

from kronclust import data as dt
from kronclust.exceptions import DegenerateDataError, IdxFormatError, ShapeError


class TestSyntheticGenerator:
    def test_one_dimensional_subspace_is_a_line(self):
        X, labels = dt.make_union_of_subspaces(1, 1, 2, 3, random_state=0)
        assert X.shape == (3, 2)
        assert np.array_equal(labels, [0, 0, 0])
        # all points are +/- the same unit vector
        reference = X[0]
        for row in X[1:]:
            assert min(np.linalg.norm(row - reference),
                       np.linalg.norm(row + reference)) < 1e-12

    def test_points_live_on_sphere_inside_subspace(self):
        X, labels = dt.make_union_of_subspaces(5, 6, 9, 100, random_state=1)
        assert X.shape == (500, 9)
        assert np.allclose(np.linalg.norm(X, axis=1), 1.0, atol=1e-12)
        for s in range(5):
            block = X[labels == s]
            # distance to the span of the block's own basis is ~0
            _, sing, _ = np.linalg.svd(block, full_matrices=False)
            assert sing[6:].max(initial=0.0) < 1e-12

    def test_deterministic(self):
        a, la = dt.make_union_of_subspaces(3, 2, 5, 10, random_state=7)
        b, lb = dt.make_union_of_subspaces(3, 2, 5, 10, random_state=7)
        assert np.array_equal(a, b)
        assert np.array_equal(la, lb)

    def test_dimension_validation(self):
        with pytest.raises(ShapeError):
            dt.make_union_of_subspaces(2, 10, 9, 5)

    def test_per_subspace_counts(self):
        X, labels = dt.make_union_of_subspaces(2, 1, 3, [4, 6], random_state=0)
        assert X.shape == (10, 3)
        assert np.array_equal(np.bincount(labels), [4, 6])

    def test_total_count_splitting(self):
        X, labels = dt.make_synthetic_total(503, 5, 2, 4, random_state=0)
        assert X.shape[0] == 503
        assert np.array_equal(np.bincount(labels), [101, 101, 101, 100, 100])


class TestNormalizePoints:
    def test_three_four_five(self):
        out = dt.normalize_points(np.array([[3.0, 4.0]]))
        assert np.allclose(out, [[0.6, 0.8]])

    def test_fixed_point(self):
        rng = np.random.default_rng(2)
        X = dt.normalize_points(rng.standard_normal((5, 3)))
        assert np.allclose(dt.normalize_points(X), X)

    def test_all_unit_after(self):
        rng = np.random.default_rng(3)
        out = dt.normalize_points(rng.standard_normal((20, 6)))
        assert np.allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-12)

    def test_zero_point_rejected_with_indices(self):
        X = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 2.0], [0.0, 0.0]])
        with pytest.raises(DegenerateDataError) as err:
            dt.normalize_points(X)
        assert err.value.indices == [1, 3]


class TestIdx:
    def fixture_pair(self, tmp_path):
        # 2 images of 2x2 pixels, written by hand
        images = tmp_path / "images.idx"
        labels = tmp_path / "labels.idx"
        header = (0x803).to_bytes(4, "big") + (2).to_bytes(4, "big") \
            + (2).to_bytes(4, "big") + (2).to_bytes(4, "big")
        # image 0 rows: [0, 255], [51, 102]; image 1 rows: [10, 20], [30, 40]
        pixels = bytes([0, 255, 51, 102, 10, 20, 30, 40])
        images.write_bytes(header + pixels)
        labels.write_bytes(
            (0x801).to_bytes(4, "big") + (2).to_bytes(4, "big") + bytes([3, 7])
        )
        return images, labels

    def test_hand_built_fixture(self, tmp_path):
        images, labels = self.fixture_pair(tmp_path)
        X, y = dt.load_idx_images(images, labels)
        assert X.shape == (2, 4)
        assert np.array_equal(y, [3, 7])
        # column-major vectorization of [[0, 255], [51, 102]] / 255
        assert np.allclose(X[0], np.array([0, 51, 255, 102]) / 255.0)

    def test_round_trip(self, tmp_path):
        images, labels = self.fixture_pair(tmp_path)
        X, y = dt.load_idx_images(images, labels)
        out_images = tmp_path / "out_images.idx"
        out_labels = tmp_path / "out_labels.idx"
        dt.save_idx_images(out_images, out_labels, X, y, (2, 2))
        assert out_images.read_bytes() == images.read_bytes()
        assert out_labels.read_bytes() == labels.read_bytes()

    def test_empty_file(self, tmp_path):
        images = tmp_path / "empty.idx"
        images.write_bytes(b"")
        labels = tmp_path / "labels.idx"
        labels.write_bytes((0x801).to_bytes(4, "big") + (0).to_bytes(4, "big"))
        with pytest.raises(IdxFormatError) as err:
            dt.load_idx_images(images, labels)
        assert err.value.offset == 0

    def test_bad_magic(self, tmp_path):
        images = tmp_path / "bad.idx"
        images.write_bytes((0x123).to_bytes(4, "big") + bytes(12))
        labels = tmp_path / "labels.idx"
        labels.write_bytes((0x801).to_bytes(4, "big") + (0).to_bytes(4, "big"))
        with pytest.raises(IdxFormatError, match="magic"):
            dt.load_idx_images(images, labels)

    def test_truncated_pixels(self, tmp_path):
        images = tmp_path / "short.idx"
        header = (0x803).to_bytes(4, "big") + (2).to_bytes(4, "big") \
            + (2).to_bytes(4, "big") + (2).to_bytes(4, "big")
        images.write_bytes(header + bytes(3))
        labels = tmp_path / "labels.idx"
        labels.write_bytes((0x801).to_bytes(4, "big") + (2).to_bytes(4, "big") + bytes(2))
        with pytest.raises(IdxFormatError, match="truncated"):
            dt.load_idx_images(images, labels)

    def test_count_mismatch(self, tmp_path):
        images, _ = self.fixture_pair(tmp_path)
        labels = tmp_path / "three_labels.idx"
        labels.write_bytes(
            (0x801).to_bytes(4, "big") + (3).to_bytes(4, "big") + bytes([1, 2, 3])
        )
        with pytest.raises(IdxFormatError, match="match"):
            dt.load_idx_images(images, labels)


class TestCsv:
    def test_round_trip_with_labels(self, tmp_path):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((6, 3))
        labels = np.array([0, 0, 1, 1, 2, 2])
        path = tmp_path / "points.csv"
        dt.save_points_csv(path, X, labels)
        X2, labels2 = dt.load_points_csv(path)
        assert np.allclose(X2, X)
        assert np.array_equal(labels2, labels)

    def test_round_trip_without_labels(self, tmp_path):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((4, 2))
        path = tmp_path / "plain.csv"
        dt.save_points_csv(path, X)
        X2, labels = dt.load_points_csv(path)
        assert labels is None
        assert np.allclose(X2, X)

    def test_forced_label_reading(self, tmp_path):
        X = np.array([[1.5, 2.0], [3.0, 4.5]])
        path = tmp_path / "forced.csv"
        dt.save_points_csv(path, X)
        X2, labels = dt.load_points_csv(path, labels=True)
        assert X2.shape == (2, 1)
        assert np.array_equal(labels, [2, 4])


class TestPlanFactorShape:
    def test_square_count_balanced(self):
        shape, pad = dt.plan_factor_shape(100, 2)
        assert shape == [(10, 10), (10, 10)]
        assert len(pad) == 0

    def test_cube_count_three_factors(self):
        shape, pad = dt.plan_factor_shape(1000, 3)
        assert shape == [(10, 10), (10, 10), (10, 10)]
        assert len(pad) == 0

    def test_prime_count_padded_to_smallest_admissible(self):
        # enumeration oracle: smallest n' >= n with a factorization into
        # two divisors within a factor 4 of sqrt(n')
        def admissible(m):
            lo = int(np.ceil(np.sqrt(m) / 4.0))
            hi = int(np.floor(np.sqrt(m) * 4.0))
            return any(m % d == 0 and lo <= d <= hi and lo <= m // d <= hi
                       for d in range(1, int(np.sqrt(m)) + 1))

        n = 97
        expected = n
        while not admissible(expected):
            expected += 1
        shape, pad = dt.plan_factor_shape(n, 2, random_state=0)
        n_prime = shape[0][0] * shape[1][0]
        assert n_prime == expected == 98
        assert len(pad) == n_prime - n
        assert np.all((0 <= pad) & (pad < n))

    def test_balance_bound_respected(self):
        for n in (30, 97, 500, 1234):
            shape, _ = dt.plan_factor_shape(n, 2)
            n_prime = shape[0][0] * shape[1][0]
            target = np.sqrt(n_prime)
            for d, _ in shape:
                assert target / 4.0 <= d <= target * 4.0

    def test_skewed_split(self):
        shape, pad = dt.plan_factor_shape(500, 2, split="skewed")
        assert shape == [(10, 10), (50, 50)]
        assert len(pad) == 0

    def test_skewed_and_balanced_share_padded_count(self):
        for n in (97, 250, 643):
            balanced, _ = dt.plan_factor_shape(n, 2, split="balanced")
            skewed, _ = dt.plan_factor_shape(n, 2, split="skewed")
            assert np.prod([d for d, _ in balanced]) == np.prod([d for d, _ in skewed])

    def test_pad_indices_deterministic(self):
        _, a = dt.plan_factor_shape(97, 2, random_state=3)
        _, b = dt.plan_factor_shape(97, 2, random_state=3)
        assert np.array_equal(a, b)

    def test_requires_two_factors(self):
        with pytest.raises(ShapeError):
            dt.plan_factor_shape(10, 1)


class TestPadPoints:
    def test_duplicates_are_verbatim(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((5, 3))
        padded = dt.pad_points(X, [2, 0])
        assert padded.shape == (7, 3)
        assert np.array_equal(padded[5], X[2])
        assert np.array_equal(padded[6], X[0])

    def test_empty_pad_returns_same_data(self):
        X = np.ones((3, 2))
        assert dt.pad_points(X, []) is X or np.array_equal(dt.pad_points(X, []), X)
