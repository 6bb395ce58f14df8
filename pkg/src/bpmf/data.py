"""MovieLens-style ratings ingestion, ID remapping, and splitting.

The CSV contract is the MovieLens layout: a ``userId,movieId,rating,
timestamp`` header followed by comma-separated rows; the timestamp
column is read and discarded. Sparse original IDs are remapped to dense
0-based indices in first-appearance order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BpmfError, DataFormatError
from .model import RatingDataset, RatingScale

EXPECTED_HEADER = ["userId", "movieId", "rating", "timestamp"]


@dataclass(frozen=True)
class RawRating:
    user_id: int
    movie_id: int
    rating: float


@dataclass
class IdMaps:
    """Bijections between original sparse IDs and dense indices."""

    user_to_index: dict
    item_to_index: dict
    index_to_user: list = field(default_factory=list)
    index_to_item: list = field(default_factory=list)

    def __post_init__(self):
        if not self.index_to_user:
            self.index_to_user = [None] * len(self.user_to_index)
            for uid, idx in self.user_to_index.items():
                self.index_to_user[idx] = uid
        if not self.index_to_item:
            self.index_to_item = [None] * len(self.item_to_index)
            for mid, idx in self.item_to_index.items():
                self.index_to_item[idx] = mid


@dataclass
class SplitDataset:
    train: RatingDataset
    validation: RatingDataset
    test: RatingDataset
    maps: IdMaps | None = None


def load_ratings(source):
    """Parse a ratings CSV; returns (list of RawRating, detected RatingScale).

    ``source`` may be a path or an open text stream. The scale is
    detected from the data: r_max = max(2, ceil(max rating)) and
    r_min = 0.5 when any half-star rating is present, else 1.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8-sig", newline="") as fh:
            return load_ratings(fh)

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError("empty file: missing header") from None
    if [h.strip() for h in header] != EXPECTED_HEADER:
        raise DataFormatError(
            f"expected header {','.join(EXPECTED_HEADER)!r}, got {','.join(header)!r}",
            line=1,
        )

    raw = []
    seen = set()
    max_rating = 0.0
    half_star = False
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) < 3:
            raise DataFormatError(f"expected at least 3 fields, got {len(row)}", line=line_no)
        try:
            user_id = int(row[0])
            movie_id = int(row[1])
            rating = float(row[2])
        except ValueError:
            raise DataFormatError(f"non-numeric field in row {row!r}", line=line_no) from None
        if not 0.0 < rating <= 10.0:
            raise DataFormatError(f"rating {rating} outside (0, 10]", line=line_no)
        key = (user_id, movie_id)
        if key in seen:
            raise DataFormatError(f"duplicate (user, movie) pair {key}", line=line_no)
        seen.add(key)
        max_rating = max(max_rating, rating)
        half_star = half_star or rating != int(rating)
        raw.append(RawRating(user_id, movie_id, rating))

    r_max = max(2, math.ceil(max_rating)) if raw else 5
    scale = RatingScale(r_max=r_max, r_min=0.5 if half_star else 1.0)
    return raw, scale


def load_ratings_text(text: str):
    """Convenience wrapper for in-memory CSV content."""
    return load_ratings(io.StringIO(text))


def build_dataset(raw, scale: RatingScale | None = None):
    """Remap IDs densely and normalize ratings; returns (RatingDataset, IdMaps)."""
    raw = list(raw)
    if not raw:
        raise BpmfError("cannot build a dataset from zero ratings")
    if scale is None:
        max_rating = max(r.rating for r in raw)
        half_star = any(r.rating != int(r.rating) for r in raw)
        scale = RatingScale(max(2, math.ceil(max_rating)), 0.5 if half_star else 1.0)

    user_map, item_map = {}, {}
    ii = np.empty(len(raw), dtype=np.int64)
    jj = np.empty(len(raw), dtype=np.int64)
    rr = np.empty(len(raw))
    for t, rec in enumerate(raw):
        ii[t] = user_map.setdefault(rec.user_id, len(user_map))
        jj[t] = item_map.setdefault(rec.movie_id, len(item_map))
        rr[t] = (rec.rating - scale.r_min) / scale.span
    data = RatingDataset(len(user_map), len(item_map), ii, jj, rr, scale)
    return data, IdMaps(user_to_index=user_map, item_to_index=item_map)


def split_dataset(data: RatingDataset, fractions=(0.6, 0.2, 0.2), seed: int = 0,
                  maps: IdMaps | None = None) -> SplitDataset:
    """Random train/validation/test partition of the rating triples.

    The triple order is permuted with a seeded PCG64 generator and cut at
    floor(L*train) and floor(L*(train+val)); all three parts keep the
    full (n_users, n_items) dimensions and the original scale.
    """
    f_train, f_val, f_test = fractions
    if min(fractions) <= 0 or abs(sum(fractions) - 1.0) > 1e-9:
        raise BpmfError(f"fractions must be positive and sum to 1, got {fractions}")
    length = data.n_ratings
    if length < 3:
        raise BpmfError(f"need at least 3 ratings to split, got {length}")

    perm = np.random.default_rng(seed).permutation(length)
    cut1 = int(math.floor(length * f_train))
    cut2 = int(math.floor(length * (f_train + f_val)))

    def part(indices):
        return RatingDataset(
            data.n_users, data.n_items,
            data.user_idx[indices], data.item_idx[indices], data.rating[indices],
            data.scale,
        )

    return SplitDataset(
        train=part(perm[:cut1]),
        validation=part(perm[cut1:cut2]),
        test=part(perm[cut2:]),
        maps=maps,
    )
