"""Context-word and collocation features: generation, counting, chi-square
association, and pruning."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

from .corpus import (
    ConfusionSet,
    Occurrence,
    Sentence,
    TagDictionary,
    find_occurrences,
)

BIAS = "BIAS"
COLLOCATION = "COLL"
CONTEXT_WORD = "CW"

WORD_SLOT = "w"
TAG_SLOT = "t"

PRUNED = "pruned"
UNPRUNED = "unpruned"


@dataclass(frozen=True, order=True)
class Feature:
    """A context-word test or a collocation pattern around the target gap.

    Field order defines the canonical total ordering used everywhere a
    deterministic iteration order matters.
    """

    kind: str
    word: str = ""
    offsets: tuple[int, ...] = ()
    slots: tuple[tuple[str, str], ...] = ()

    def key(self) -> str:
        """Canonical one-line form: ``CW <word>`` or ``COLL <off>:<slot>...``
        with ``_`` marking the target gap; slots are ``w=<word>`` or
        ``t=<TAG>``."""
        if self.kind == CONTEXT_WORD:
            return f"CW {self.word}"
        if self.kind == BIAS:
            return BIAS
        parts = [
            f"{off:+d}:{slot_kind}={value}"
            for off, (slot_kind, value) in zip(self.offsets, self.slots)
        ]
        gap_at = sum(1 for off in self.offsets if off < 0)
        parts.insert(gap_at, "_")
        return "COLL " + " ".join(parts)


def context_word(word: str) -> Feature:
    return Feature(CONTEXT_WORD, word=word)


def collocation(
    offsets: Sequence[int], slots: Sequence[tuple[str, str]]
) -> Feature:
    return Feature(COLLOCATION, offsets=tuple(offsets), slots=tuple(slots))


def parse_feature_key(key: str) -> Feature:
    """Inverse of :meth:`Feature.key`."""
    if key == BIAS:
        return Feature(BIAS)
    if key.startswith("CW "):
        return context_word(key[3:])
    if not key.startswith("COLL "):
        raise ValueError(f"malformed feature key: {key!r}")
    offsets = []
    slots = []
    for part in key[5:].split(" "):
        if part == "_":
            continue
        offset_text, slot = part.split(":", 1)
        slot_kind, value = slot.split("=", 1)
        if slot_kind not in (WORD_SLOT, TAG_SLOT):
            raise ValueError(f"malformed feature key: {key!r}")
        offsets.append(int(offset_text))
        slots.append((slot_kind, value))
    return collocation(offsets, slots)


def dump_features(features: Iterable[Feature]) -> str:
    """Learned-feature dump: one canonical key per line, canonical order."""
    return "".join(f.key() + "\n" for f in sorted(features))


@dataclass(frozen=True)
class ExtractionParams:
    """Window half-width k and maximum collocation length l."""

    k: int = 10
    l: int = 2

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("context window k must be >= 1")
        if self.l not in (1, 2):
            raise ValueError("collocation length l must be 1 or 2")


# Contiguous offset spans of length <= 2 adjacent to or straddling the gap.
_SPANS_L1 = ((-1,), (1,))
_SPANS_L2 = ((-1,), (1,), (-2, -1), (-1, 1), (1, 2))


def _collocation_spans(l: int) -> tuple[tuple[int, ...], ...]:
    return _SPANS_L2 if l == 2 else _SPANS_L1


def generate_features(
    sentence: Sentence,
    occurrence: Occurrence,
    params: ExtractionParams,
    tagdict: TagDictionary,
) -> set[Feature]:
    """All possible features for the context of one occurrence.

    Context words: one feature per distinct token within k tokens left of the
    span or right of it (the span itself excluded), clipped at the sentence
    edges. Collocations: every in-bounds offset span, with each slot realized
    as either the literal word or each tag in the word's tag set; offsets are
    measured from the span edges (-1 = token before the span, +1 = token
    after it).
    """
    surfaces = sentence.surfaces
    start, end = occurrence.span_start, occurrence.span_end
    if not (0 <= start <= end <= len(surfaces)):
        raise ValueError("occurrence lies outside its sentence")
    features: set[Feature] = set()
    window_start = max(0, start - params.k)
    for surface in surfaces[window_start:start]:
        features.add(context_word(surface))
    for surface in surfaces[end : end + params.k]:
        features.add(context_word(surface))
    for span in _collocation_spans(params.l):
        positions = [start + off if off < 0 else end + off - 1 for off in span]
        if not all(0 <= p < len(surfaces) for p in positions):
            continue
        slot_choices = []
        for position in positions:
            word = surfaces[position]
            choices = [(WORD_SLOT, word)]
            choices.extend((TAG_SLOT, tag) for tag in sorted(tagdict.lookup(word)))
            slot_choices.append(choices)
        for combo in product(*slot_choices):
            features.add(collocation(span, combo))
    return features


class FeatureStats:
    """Per-feature, per-member co-occurrence counts from a training corpus."""

    def __init__(self, confusion_set: ConfusionSet, params: ExtractionParams):
        self.confusion_set = confusion_set
        self.params = params
        self.counts: dict[Feature, list[int]] = {}
        self.occurrences = [0] * len(confusion_set.members)

    @property
    def n_members(self) -> int:
        return len(self.confusion_set.members)

    @property
    def total_occurrences(self) -> int:
        return sum(self.occurrences)

    def feature_total(self, feature: Feature) -> int:
        return sum(self.counts[feature])

    def add(self, feature_set: Iterable[Feature], member_index: int):
        self.occurrences[member_index] += 1
        for feature in sorted(feature_set):
            row = self.counts.get(feature)
            if row is None:
                row = self.counts[feature] = [0] * self.n_members
            row[member_index] += 1

    def table(self, feature: Feature, member_index: int) -> tuple[int, int, int, int]:
        """2x2 association table: feature present/absent x member vs rest."""
        a = self.counts[feature][member_index]
        b = self.feature_total(feature) - a
        c = self.occurrences[member_index] - a
        d = (self.total_occurrences - self.occurrences[member_index]) - b
        return a, b, c, d

    def max_association(self, feature: Feature) -> float:
        """Largest chi-square statistic over members (for >2-member sets the
        member with the strongest association decides)."""
        return max(
            chi_square_2x2(*self.table(feature, i))[0] for i in range(self.n_members)
        )


def collect_stats(
    corpus: Sequence[Sentence],
    confusion_set: ConfusionSet,
    params: ExtractionParams,
    tagdict: TagDictionary,
) -> FeatureStats:
    """Accumulate feature statistics over every occurrence in the corpus."""
    stats = FeatureStats(confusion_set, params)
    for occ in find_occurrences(corpus, confusion_set):
        stats.add(generate_features(occ.sentence, occ, params, tagdict), occ.member_index)
    if stats.total_occurrences == 0:
        raise ValueError(
            f"no occurrences of {{{confusion_set.label}}} in corpus; cannot train"
        )
    return stats


def chi2_sf(statistic: float) -> float:
    """Survival function of the chi-square distribution with 1 dof."""
    return math.erfc(math.sqrt(statistic / 2.0))


def chi_square_2x2(a: float, b: float, c: float, d: float) -> tuple[float, float]:
    """Pearson chi-square for a 2x2 table, 1 dof, no continuity correction.

    Returns (statistic, p_value); a table with any zero marginal is treated
    as perfectly independent (statistic 0, p 1).
    """
    if min(a, b, c, d) < 0:
        raise ValueError("chi-square counts must be non-negative")
    n = a + b + c + d
    denominator = (a + b) * (c + d) * (a + c) * (b + d)
    if denominator == 0:
        return 0.0, 1.0
    statistic = n * (a * d - b * c) ** 2 / denominator
    return statistic, chi2_sf(statistic)


@dataclass(frozen=True)
class PruningPolicy:
    """Pruned mode drops rare, near-universal, and uncorrelated features;
    unpruned mode drops only singletons."""

    mode: str = PRUNED
    min_occurrences: int = 10
    min_nonoccurrences: int = 10
    alpha: float = 0.05

    def __post_init__(self):
        if self.mode not in (PRUNED, UNPRUNED):
            raise ValueError(f"unknown pruning mode: {self.mode!r}")


def prune(stats: FeatureStats, policy: PruningPolicy) -> tuple[Feature, ...]:
    """The retained feature set, in canonical order."""
    retained = []
    n_total = stats.total_occurrences
    for feature in sorted(stats.counts):
        total = stats.feature_total(feature)
        if policy.mode == UNPRUNED:
            if total != 1:
                retained.append(feature)
            continue
        if total < policy.min_occurrences:
            continue
        if n_total - total < policy.min_nonoccurrences:
            continue
        if chi2_sf(stats.max_association(feature)) >= policy.alpha:
            continue
        retained.append(feature)
    return tuple(retained)


def extract_active(
    sentence: Sentence,
    occurrence: Occurrence,
    learned_features: Iterable[Feature],
    params: ExtractionParams,
    tagdict: TagDictionary,
) -> tuple[Feature, ...]:
    """Active features for one occurrence: generated set intersected with the
    learned set, in canonical order."""
    learned = (
        learned_features
        if isinstance(learned_features, (set, frozenset))
        else set(learned_features)
    )
    return tuple(sorted(generate_features(sentence, occurrence, params, tagdict) & learned))
