"""Tests for CSV ingestion, ID remapping, normalization, and splitting."""

import numpy as np
import pytest

from bpmf.data import (
    RawRating,
    build_dataset,
    load_ratings,
    load_ratings_text,
    split_dataset,
)
from bpmf.errors import BpmfError, DataFormatError
from bpmf.model import RatingScale, denormalize_rating

from conftest import make_dataset

HEADER = "userId,movieId,rating,timestamp\n"

SAMPLE_ROWS = (
    "1,1,4,964982703\n"
    "1,3,4,964981247\n"
    "1,6,4,964982224\n"
    "1,47,5,964983815\n"
    "1,50,5,964982931\n"
)


class TestLoadRatings:
    def test_sample_rows(self):
        raw, scale = load_ratings_text(HEADER + SAMPLE_ROWS)
        assert len(raw) == 5
        assert raw[0] == RawRating(1, 1, 4.0)
        assert raw[3] == RawRating(1, 47, 5.0)
        assert scale == RatingScale(5, r_min=1.0)

    def test_header_only(self):
        raw, _ = load_ratings_text(HEADER)
        assert raw == []

    def test_missing_header(self):
        with pytest.raises(DataFormatError):
            load_ratings_text("a,b,c,d\n1,1,4,0\n")

    def test_empty_file(self):
        with pytest.raises(DataFormatError):
            load_ratings_text("")

    def test_malformed_field_names_line(self):
        text = HEADER + "1,1,4,964982703\n1,3,abc,964981247\n"
        with pytest.raises(DataFormatError) as err:
            load_ratings_text(text)
        assert err.value.line == 3
        assert "3" in str(err.value)

    def test_rating_out_of_range(self):
        with pytest.raises(DataFormatError) as err:
            load_ratings_text(HEADER + "1,1,11,0\n")
        assert err.value.line == 2
        with pytest.raises(DataFormatError):
            load_ratings_text(HEADER + "1,1,0,0\n")

    def test_duplicate_pair(self):
        text = HEADER + "1,1,4,0\n1,1,3,1\n"
        with pytest.raises(DataFormatError) as err:
            load_ratings_text(text)
        assert err.value.line == 3

    def test_half_star_scale_detection(self):
        raw, scale = load_ratings_text(HEADER + "1,1,3.5,0\n1,2,5,0\n")
        assert scale == RatingScale(5, r_min=0.5)
        assert raw[0].rating == 3.5

    def test_integer_scale_minimum_two(self):
        _, scale = load_ratings_text(HEADER + "1,1,1,0\n")
        assert scale.r_max == 2

    def test_crlf_line_endings(self):
        raw, _ = load_ratings_text(HEADER.strip() + "\r\n1,1,4,0\r\n1,2,5,0\r\n")
        assert len(raw) == 2

    def test_full_size_file(self, ratings_csv_path):
        raw, scale = load_ratings(ratings_csv_path)
        assert len(raw) == 100_836
        assert scale.r_max == 5


class TestBuildDataset:
    def test_full_size_counts(self, full_dataset):
        data, maps, _ = full_dataset
        assert data.n_users == 610
        assert data.n_items == 9_724
        assert data.n_ratings == 100_836
        assert len(maps.user_to_index) == 610
        assert len(maps.item_to_index) == 9_724

    def test_single_rating(self):
        data, maps = build_dataset([RawRating(7, 42, 5.0)], RatingScale(5))
        assert (data.n_users, data.n_items) == (1, 1)
        assert data.triples() == [(0, 0, 1.0)]
        assert maps.user_to_index == {7: 0}
        assert maps.item_to_index == {42: 0}

    def test_two_users_share_one_movie(self):
        raw = [RawRating(5, 9, 3.0), RawRating(2, 9, 4.0)]
        data, maps = build_dataset(raw, RatingScale(5))
        assert data.n_items == 1
        assert sorted(data.user_idx.tolist()) == [0, 1]
        assert maps.user_to_index == {5: 0, 2: 1}

    def test_first_appearance_order(self):
        raw = [RawRating(30, 7, 1.0), RawRating(10, 5, 2.0), RawRating(30, 5, 3.0)]
        _, maps = build_dataset(raw, RatingScale(5))
        assert maps.user_to_index == {30: 0, 10: 1}
        assert maps.item_to_index == {7: 0, 5: 1}
        assert maps.index_to_user == [30, 10]
        assert maps.index_to_item == [7, 5]

    def test_empty_input_errors(self):
        with pytest.raises(BpmfError):
            build_dataset([])

    @pytest.mark.parametrize(
        "rows,scale",
        [
            (HEADER + "1,1,1,0\n1,2,3,0\n1,3,5,0\n2,1,4,0\n", RatingScale(5)),
            (HEADER + "1,1,0.5,0\n1,2,3.5,0\n1,3,5,0\n", RatingScale(5, r_min=0.5)),
        ],
    )
    def test_round_trip_exact(self, rows, scale):
        raw, detected = load_ratings_text(rows)
        assert detected == scale
        data, _ = build_dataset(raw, detected)
        recovered = denormalize_rating(data.rating, detected)
        np.testing.assert_allclose(recovered, [r.rating for r in raw], atol=1e-12)

    def test_id_maps_are_bijections(self, full_dataset):
        _, maps, _ = full_dataset
        for uid, idx in maps.user_to_index.items():
            assert maps.index_to_user[idx] == uid
        for mid, idx in maps.item_to_index.items():
            assert maps.index_to_item[idx] == mid


class TestSplitDataset:
    def test_ten_triples_six_two_two(self):
        data = make_dataset(5, 5, 10, seed=0)
        split = split_dataset(data, (0.6, 0.2, 0.2), seed=1)
        assert split.train.n_ratings == 6
        assert split.validation.n_ratings == 2
        assert split.test.n_ratings == 2

    def test_same_seed_same_membership(self):
        data = make_dataset(6, 6, 20, seed=1)
        a = split_dataset(data, seed=5)
        b = split_dataset(data, seed=5)
        np.testing.assert_array_equal(a.train.user_idx, b.train.user_idx)
        np.testing.assert_array_equal(a.test.rating, b.test.rating)

    def test_partition_property_100_seeds(self):
        data = make_dataset(40, 50, 1000, seed=2)
        full = set()
        for i, j, r in data.triples():
            full.add((i, j))
        for seed in range(100):
            split = split_dataset(data, seed=seed)
            parts = [set(zip(p.user_idx.tolist(), p.item_idx.tolist()))
                     for p in (split.train, split.validation, split.test)]
            assert parts[0] | parts[1] | parts[2] == full
            assert not (parts[0] & parts[1])
            assert not (parts[0] & parts[2])
            assert not (parts[1] & parts[2])
            total = sum(len(p) for p in parts)
            assert total == data.n_ratings

    def test_different_seeds_differ(self):
        data = make_dataset(6, 6, 30, seed=3)
        differing = 0
        for seed in range(10):
            a = split_dataset(data, seed=2 * seed)
            b = split_dataset(data, seed=2 * seed + 1)
            keys_a = set(zip(a.test.user_idx.tolist(), a.test.item_idx.tolist()))
            keys_b = set(zip(b.test.user_idx.tolist(), b.test.item_idx.tolist()))
            if keys_a != keys_b:
                differing += 1
        assert differing >= 9

    def test_dimensions_and_scale_preserved(self):
        data = make_dataset(7, 8, 20, seed=4)
        split = split_dataset(data, seed=0)
        for part in (split.train, split.validation, split.test):
            assert part.n_users == 7
            assert part.n_items == 8
            assert part.scale == data.scale

    def test_bad_fractions(self):
        data = make_dataset(5, 5, 10)
        with pytest.raises(BpmfError):
            split_dataset(data, (0.5, 0.2, 0.2))
        with pytest.raises(BpmfError):
            split_dataset(data, (0.8, 0.2, 0.0))

    def test_too_few_triples(self):
        data = make_dataset(2, 2, 2, seed=0)
        with pytest.raises(BpmfError):
            split_dataset(data)
