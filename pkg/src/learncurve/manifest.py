"""Reproducible experiment manifests for nested-subset training protocols.

Nesting is encoded by per-class ranks: every image gets a position in its
class's shuffled order, and the training subset of total size s consists
of the first ``s / n_classes`` ranks of every class.  Smaller subsets are
therefore contained in larger ones by construction, and every subset is
exactly class-balanced.

All randomness is keyed hashing of ``(seed, identity)`` rather than
positional draws.  Label-noise decisions depend only on the seed and the
image id, so the flipped images inside any subset are exactly the flips of
the full pool intersected with that subset, and results are independent of
listing order.  Pixel data is never touched; the manifest holds ids only.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

from .errors import DataError, ParameterError

_HASH_PERSON = b"lc.manifest"


def _digest(*parts: object) -> bytes:
    h = hashlib.blake2b(digest_size=16, person=_HASH_PERSON)
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")  # separator: ("ab", "c") must differ from ("a", "bc")
    return h.digest()


def _unit(*parts: object) -> float:
    """Deterministic uniform draw in [0, 1) keyed by the given parts."""
    return int.from_bytes(_digest(*parts)[:8], "big") / 2.0**64


def _index(k: int, *parts: object) -> int:
    return int.from_bytes(_digest(*parts)[:8], "big") % k


def _rng(*parts: object) -> np.random.Generator:
    return np.random.default_rng(int.from_bytes(_digest(*parts), "big"))


@dataclass(frozen=True)
class ImageRecord:
    """One image in the pool: identity, labels, noise state, shuffle rank."""

    image_id: str
    true_label: str
    assigned_label: str
    noise_flag: bool
    class_rank: int

    def __post_init__(self):
        if self.noise_flag != (self.assigned_label != self.true_label):
            raise ParameterError(
                f"noise_flag must mirror a label change (image {self.image_id!r})"
            )
        if self.class_rank < 0:
            raise ParameterError(f"class_rank must be >= 0, got {self.class_rank}")


@dataclass(frozen=True)
class SubsetManifest:
    """Deterministic nested training subsets with per-image label state.

    ``per_class_pool`` is the usable pool depth per class (the smallest
    class count).  ``diagnostics`` records, for classes that carry capture
    groups, how many adjacent same-group pairs remain inside the deepest
    subset after best-effort interleaving.
    """

    classes: tuple[str, ...]
    per_class_pool: int
    sizes: tuple[int, ...]
    seed: int
    records: tuple[ImageRecord, ...]
    diagnostics: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        k = len(self.classes)
        if k < 1:
            raise ParameterError("manifest needs at least one class")
        if len(set(self.classes)) != k:
            raise ParameterError("class names must be unique")
        if not self.sizes:
            raise ParameterError("sizes must be non-empty")
        if any(s < 1 for s in self.sizes):
            raise ParameterError("subset sizes must be positive")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ParameterError(f"sizes must be strictly increasing, got {self.sizes}")
        for s in self.sizes:
            if s % k != 0:
                raise ParameterError(f"subset size {s} is not divisible by {k} classes")
        if max(self.sizes) // k > self.per_class_pool:
            raise ParameterError(
                f"largest subset needs {max(self.sizes) // k} images per class, "
                f"pool depth is {self.per_class_pool}"
            )
        class_set = set(self.classes)
        ranks: dict[str, set[int]] = {c: set() for c in self.classes}
        ids = set()
        for rec in self.records:
            if rec.image_id in ids:
                raise DataError(f"duplicate image id {rec.image_id!r}")
            ids.add(rec.image_id)
            if rec.true_label not in class_set or rec.assigned_label not in class_set:
                raise DataError(f"image {rec.image_id!r} has a label outside the class list")
            if rec.class_rank in ranks[rec.true_label]:
                raise DataError(
                    f"duplicate rank {rec.class_rank} in class {rec.true_label!r}"
                )
            ranks[rec.true_label].add(rec.class_rank)
        counts = {c: len(r) for c, r in ranks.items()}
        for c, r in ranks.items():
            if r != set(range(counts[c])):
                raise DataError(f"ranks of class {c!r} are not contiguous from 0")
        if min(counts.values(), default=0) != self.per_class_pool:
            raise ParameterError(
                f"per_class_pool={self.per_class_pool} does not match the smallest "
                f"class count {min(counts.values(), default=0)}"
            )

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def subset_records(self, size: int) -> list[ImageRecord]:
        """Records of the nested subset of the given total size, class then rank order."""
        if size not in self.sizes:
            raise DataError(f"size {size} is not one of the manifest subsets {self.sizes}")
        depth = size // self.n_classes
        order = {c: i for i, c in enumerate(self.classes)}
        picked = [r for r in self.records if r.class_rank < depth]
        picked.sort(key=lambda r: (order[r.true_label], r.class_rank))
        return picked

    def subset_ids(self, size: int) -> frozenset[str]:
        return frozenset(r.image_id for r in self.subset_records(size))

    def flipped_ids(self, size: int | None = None) -> frozenset[str]:
        """Ids with noisy labels, over the whole pool or one subset."""
        recs = self.records if size is None else self.subset_records(size)
        return frozenset(r.image_id for r in recs if r.noise_flag)


def _interleave(
    ordered: list[tuple[str, str | None]], depth: int
) -> tuple[list[tuple[str, str | None]], int]:
    """Greedy repair so no two consecutive entries within ``depth`` share a group.

    Swaps a conflicting entry with the nearest later entry (anywhere in the
    pool) of a different group; when the whole tail shares the previous
    group there is nothing to swap and the collision stays.  Returns the
    repaired order and the number of remaining collisions inside ``depth``.
    """
    items = list(ordered)
    limit = min(depth, len(items))
    for i in range(1, limit):
        prev_group = items[i - 1][1]
        if prev_group is None or items[i][1] != prev_group:
            continue
        for j in range(i + 1, len(items)):
            if items[j][1] != prev_group:
                items[i], items[j] = items[j], items[i]
                break
    collisions = sum(
        1
        for i in range(1, limit)
        if items[i][1] is not None and items[i][1] == items[i - 1][1]
    )
    return items, collisions


def build_nested_subsets(
    images: Iterable[tuple[str, str, str | None]],
    sizes: Iterable[int],
    seed: int,
) -> SubsetManifest:
    """Shuffle each class and assign the ranks that define the nested subsets.

    ``images`` yields (image_id, class_name, capture_group) triples; the
    capture group may be ``None`` or empty.  The per-class shuffle is keyed
    by (seed, class) over ids sorted beforehand, so the result does not
    depend on listing order.  When capture groups are present, consecutive
    ranks within the deepest subset are kept from sharing a group on a
    best-effort basis (same-plant-same-day images should not line up).
    """
    if seed < 0:
        raise ParameterError(f"seed must be a non-negative integer, got {seed}")
    sizes = [int(s) for s in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ParameterError(f"sizes must be strictly increasing, got {sizes}")
    by_class: dict[str, list[tuple[str, str | None]]] = {}
    seen_ids = set()
    for image_id, class_name, group in images:
        if image_id in seen_ids:
            raise DataError(f"duplicate image id {image_id!r}")
        seen_ids.add(image_id)
        by_class.setdefault(class_name, []).append((image_id, group or None))
    if not by_class:
        raise DataError("no images supplied")

    classes = tuple(sorted(by_class))
    k = len(classes)
    if not sizes:
        raise ParameterError("sizes must be non-empty")
    for s in sizes:
        if s % k != 0:
            raise ParameterError(f"subset size {s} is not divisible by {k} classes")
    depth = max(sizes) // k
    for cls in classes:
        if len(by_class[cls]) < depth:
            raise DataError(
                f"class {cls!r} has only {len(by_class[cls])} images; "
                f"the largest subset needs {depth} per class"
            )

    records = []
    diagnostics: dict[str, int] = {}
    for cls in classes:
        members = sorted(by_class[cls])
        perm = _rng(seed, "shuffle", cls).permutation(len(members))
        ordered = [members[i] for i in perm]
        if any(group is not None for _, group in ordered):
            ordered, collisions = _interleave(ordered, depth)
            diagnostics[cls] = collisions
        for rank, (image_id, _) in enumerate(ordered):
            records.append(
                ImageRecord(
                    image_id=image_id,
                    true_label=cls,
                    assigned_label=cls,
                    noise_flag=False,
                    class_rank=rank,
                )
            )
    return SubsetManifest(
        classes=classes,
        per_class_pool=min(len(v) for v in by_class.values()),
        sizes=tuple(sizes),
        seed=seed,
        records=tuple(records),
        diagnostics=diagnostics,
    )


def inject_label_noise(m: SubsetManifest, p: float, seed: int) -> SubsetManifest:
    """Flip each image's label to a uniformly random wrong class with probability p.

    The flip decision and the replacement label are pure functions of
    ``(seed, image_id)``, so an image flipped in the full pool is flipped
    identically in every subset containing it.  Labels are re-derived from
    the true labels, replacing any noise injected earlier.
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"noise probability must lie in [0, 1], got {p}")
    if seed < 0:
        raise ParameterError(f"seed must be a non-negative integer, got {seed}")
    if m.n_classes < 2:
        raise ParameterError("need at least 2 classes to pick a wrong label")

    new_records = []
    for rec in m.records:
        if p > 0.0 and _unit(seed, "flip", rec.image_id) < p:
            wrongs = [c for c in m.classes if c != rec.true_label]
            wrong = wrongs[_index(len(wrongs), seed, "label", rec.image_id)]
            new_records.append(replace(rec, assigned_label=wrong, noise_flag=True))
        else:
            new_records.append(replace(rec, assigned_label=rec.true_label, noise_flag=False))
    return replace(m, records=tuple(new_records))


def holdout_split(
    m: SubsetManifest, size: int, fraction: float = 0.20, seed: int = 0
) -> tuple[list[str], list[str]]:
    """Partition the subset of the given size into (train, validation) ids.

    The validation part holds ``round(fraction * size)`` images, spread
    over the classes as evenly as possible (remainders rotate through the
    classes at a keyed offset).  Selection is a pure function of
    ``(m.seed, seed, size, fraction)``: repeated calls agree, and models
    trained on the same volume hold out the same data.  Both id lists are
    sorted lexicographically.
    """
    if size not in m.sizes:
        raise DataError(f"size {size} is not one of the manifest subsets {m.sizes}")
    if not 0.0 < fraction < 1.0:
        raise ParameterError(f"holdout fraction must lie in (0, 1), got {fraction}")
    if seed < 0:
        raise ParameterError(f"seed must be a non-negative integer, got {seed}")

    k = m.n_classes
    depth = size // k
    val_total = round(fraction * size)
    base, extra = divmod(val_total, k)
    start = _index(k, m.seed, seed, size, fraction, "rotation")

    members: dict[str, list[str]] = {c: [None] * depth for c in m.classes}
    for rec in m.records:
        if rec.class_rank < depth:
            members[rec.true_label][rec.class_rank] = rec.image_id

    train: list[str] = []
    validation: list[str] = []
    for i, cls in enumerate(m.classes):
        quota = base + (1 if (i - start) % k < extra else 0)
        rng = _rng(m.seed, seed, size, fraction, "holdout", cls)
        chosen = set(rng.choice(depth, size=quota, replace=False).tolist()) if quota else set()
        for rank, image_id in enumerate(members[cls]):
            (validation if rank in chosen else train).append(image_id)
    return sorted(train), sorted(validation)


def restrict_to_size(m: SubsetManifest, size: int) -> SubsetManifest:
    """Stand-alone manifest holding exactly the subset of the given size."""
    if size not in m.sizes:
        raise DataError(f"size {size} is not one of the manifest subsets {m.sizes}")
    depth = size // m.n_classes
    return SubsetManifest(
        classes=m.classes,
        per_class_pool=depth,
        sizes=tuple(s for s in m.sizes if s <= size),
        seed=m.seed,
        records=tuple(r for r in m.records if r.class_rank < depth),
        diagnostics=dict(m.diagnostics),
    )
