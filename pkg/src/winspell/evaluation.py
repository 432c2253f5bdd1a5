"""Experiment harness: corpus splits, baseline, significance tests, and the
system ladder over one or more confusion sets."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .bayes import INTERPOLATIVE, classify_bayes, train_bayes
from .corpus import (
    ConfusionSet,
    Sentence,
    TagDictionary,
    corrupt,
    find_occurrences,
    load_confusion_sets,
    load_corpus,
    load_tag_dictionary,
)
from .features import (
    ExtractionParams,
    FeatureStats,
    PruningPolicy,
    chi2_sf,
    collect_stats,
    extract_active,
    prune,
)
from .winnow import (
    FULL,
    ONE_LAYER,
    SPARSE,
    TWO_LAYER,
    WinnowNetwork,
    WinnowParams,
    classify_winnow,
    init_bayesian,
    sparsify,
    train_network,
)

WITHIN = "within"
ACROSS = "across"
SUPUNSUP = "supunsup"
PROTOCOLS = (WITHIN, ACROSS, SUPUNSUP)

SYSTEMS = (
    "baseline",
    "bayes",
    "simplified-bayes",
    "winnow",
    "simplified-winnow",
    "winnow-1layer",
    "winnow-2layer",
    "winnow-bayes-init",
)

# Column order of the ablation ladder, from the Bayesian end to the full
# sparse Winnow system.
ABLATION_LADDER = (
    "bayes",
    "simplified-bayes",
    "winnow-1layer",
    "winnow-2layer",
    "winnow-bayes-init",
)


@dataclass(frozen=True)
class SplitSpec:
    fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.fraction < 1:
            raise ValueError("split fraction must be strictly between 0 and 1")


def split_corpus(
    sentences: Sequence[Sentence], spec: SplitSpec
) -> tuple[list[Sentence], list[Sentence]]:
    """Seeded random partition by sentence; the first part gets
    floor(fraction * n) sentences. Corpus order is preserved within each
    part."""
    if len(sentences) < 2:
        raise ValueError("cannot split a corpus of fewer than 2 sentences")
    indices = list(range(len(sentences)))
    random.Random(spec.seed).shuffle(indices)
    chosen = set(indices[: int(spec.fraction * len(sentences))])
    first = [s for i, s in enumerate(sentences) if i in chosen]
    second = [s for i, s in enumerate(sentences) if i not in chosen]
    return first, second


def baseline_classify(stats: FeatureStats) -> Callable[[Iterable], int]:
    """Constant predictor: the most common training member, every time."""
    occurrences = stats.occurrences
    majority = max(range(len(occurrences)), key=lambda i: (occurrences[i], -i))
    return lambda active_set: majority


def mcnemar_test(
    outcomes_a: Sequence[bool], outcomes_b: Sequence[bool]
) -> float:
    """Two-sided McNemar p-value over paired per-case outcomes, using the
    continuity-corrected chi-square statistic on the discordant counts."""
    if len(outcomes_a) != len(outcomes_b):
        raise ValueError("outcome sequences must pair up case by case")
    b = sum(1 for x, y in zip(outcomes_a, outcomes_b) if x and not y)
    c = sum(1 for x, y in zip(outcomes_a, outcomes_b) if not x and y)
    if b + c == 0:
        return 1.0
    statistic = (abs(b - c) - 1) ** 2 / (b + c)
    return chi2_sf(statistic)


def two_proportion_test(correct1: int, n1: int, correct2: int, n2: int) -> float:
    """Two-sided pooled-variance z-test for the difference of proportions."""
    if n1 <= 0 or n2 <= 0:
        raise ValueError("sample sizes must be positive")
    p1, p2 = correct1 / n1, correct2 / n2
    pooled = (correct1 + correct2) / (n1 + n2)
    variance = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)
    if variance == 0.0:
        return 1.0
    z = (p1 - p2) / math.sqrt(variance)
    return math.erfc(abs(z) / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# System builders
# ---------------------------------------------------------------------------


def train_system_model(
    name: str,
    stats: FeatureStats,
    retained,
    policy: PruningPolicy,
    train_stream: Sequence[tuple[tuple, int]],
    extraction: ExtractionParams,
    winnow_params: WinnowParams,
):
    """Train one persistable system; returns a BayesModel or WinnowNetwork."""
    if name == "bayes":
        return train_bayes(stats, policy, INTERPOLATIVE, True, retained)
    if name == "simplified-bayes":
        return train_bayes(stats, policy, INTERPOLATIVE, False, retained)

    priors = tuple(n / stats.total_occurrences for n in stats.occurrences)
    if name == "winnow":
        network = WinnowNetwork(
            stats.confusion_set, retained, winnow_params, extraction,
            layer_mode=TWO_LAYER, architecture=SPARSE, priors=priors,
        )
        train_network(network, train_stream)
        return network
    if name not in SYSTEMS or name == "baseline":
        raise ValueError(f"unknown system: {name!r}")

    # The remaining variants start from Bayesian weights derived from the
    # dependency-resolution-free model.
    model = train_bayes(stats, policy, INTERPOLATIVE, False, retained)
    layer = ONE_LAYER if name in ("simplified-winnow", "winnow-1layer") else TWO_LAYER
    network = WinnowNetwork(
        stats.confusion_set, retained, winnow_params, extraction,
        layer_mode=layer, architecture=FULL, priors=priors,
    )
    init_bayesian(network, model)
    if name == "winnow-bayes-init":
        sparsify(network, model.counts)
    if name != "simplified-winnow":
        train_network(network, train_stream)
    return network


def build_system(
    name: str,
    stats: FeatureStats,
    retained,
    policy: PruningPolicy,
    train_stream: Sequence[tuple[tuple, int]],
    extraction: ExtractionParams,
    winnow_params: WinnowParams,
) -> Callable[[Iterable], int]:
    """Train one system and return its predictor (active set -> member)."""
    if name == "baseline":
        return baseline_classify(stats)
    model = train_system_model(
        name, stats, retained, policy, train_stream, extraction, winnow_params
    )
    if isinstance(model, WinnowNetwork):
        return lambda active: classify_winnow(model, active).chosen
    return lambda active: classify_bayes(model, active).chosen


@dataclass
class SetResult:
    """Per-case outcomes of every system on one confusion set's test cases."""

    label: str
    cases: int
    outcomes: dict[str, list[bool]]

    def percent(self, system: str) -> float:
        if self.cases == 0:
            return 0.0
        return 100.0 * sum(self.outcomes[system]) / self.cases


def evaluate_systems(
    train_sentences: Sequence[Sentence],
    test_sentences: Sequence[Sentence],
    confusion_set: ConfusionSet,
    tagdict: TagDictionary,
    systems: Sequence[str],
    mode: str = "pruned",
    extraction: ExtractionParams | None = None,
    winnow_params: WinnowParams | None = None,
) -> SetResult:
    """Train every requested system on the training corpus and score it on
    the test corpus, for one confusion set."""
    extraction = extraction or ExtractionParams()
    winnow_params = winnow_params or WinnowParams()
    policy = PruningPolicy(mode=mode)
    stats = collect_stats(train_sentences, confusion_set, extraction, tagdict)
    retained = prune(stats, policy)
    learned = set(retained)

    def actives(sentences):
        return [
            (extract_active(o.sentence, o, learned, extraction, tagdict), o.member_index)
            for o in find_occurrences(sentences, confusion_set)
        ]

    train_stream = actives(train_sentences)
    test_cases = actives(test_sentences)
    outcomes = {}
    for name in systems:
        predict = build_system(
            name, stats, retained, policy, train_stream, extraction, winnow_params
        )
        outcomes[name] = [predict(active) == member for active, member in test_cases]
    return SetResult(confusion_set.label, len(test_cases), outcomes)


@dataclass
class EvalReport:
    """Per-set and pooled scores plus pairwise McNemar verdicts."""

    systems: tuple[str, ...]
    results: list[SetResult]

    @property
    def total_cases(self) -> int:
        return sum(r.cases for r in self.results)

    def pooled_outcomes(self, system: str) -> list[bool]:
        pooled: list[bool] = []
        for r in self.results:
            pooled.extend(r.outcomes[system])
        return pooled

    def overall_percent(self, system: str) -> float:
        total = self.total_cases
        if total == 0:
            return 0.0
        return 100.0 * sum(self.pooled_outcomes(system)) / total

    def adjacent_pairs(self) -> list[tuple[str, str]]:
        return list(zip(self.systems, self.systems[1:]))

    def mcnemar_overall(self, system_a: str, system_b: str) -> float:
        return mcnemar_test(self.pooled_outcomes(system_a), self.pooled_outcomes(system_b))

    def _header(self) -> list[str]:
        columns = ["confusion_set", "cases", *self.systems]
        columns += [f"p_{a}_vs_{b}" for a, b in self.adjacent_pairs()]
        return columns

    def _rows(self) -> list[list[str]]:
        rows = []
        for r in self.results:
            row = [r.label, str(r.cases)]
            row += [f"{r.percent(s):.1f}" for s in self.systems]
            row += [
                f"{mcnemar_test(r.outcomes[a], r.outcomes[b]):.4g}"
                for a, b in self.adjacent_pairs()
            ]
            rows.append(row)
        overall = ["OVERALL", str(self.total_cases)]
        overall += [f"{self.overall_percent(s):.1f}" for s in self.systems]
        overall += [
            f"{self.mcnemar_overall(a, b):.4g}" for a, b in self.adjacent_pairs()
        ]
        rows.append(overall)
        return rows

    def to_tsv(self) -> str:
        lines = ["\t".join(self._header())]
        lines += ["\t".join(row) for row in self._rows()]
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        header = self._header()
        rows = [header] + self._rows()
        widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
        out = []
        for row in rows:
            out.append(
                "  ".join(
                    cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                    for i, cell in enumerate(row)
                ).rstrip()
            )
        return "\n".join(out) + "\n"


@dataclass
class ExperimentConfig:
    """Everything one experiment needs: file paths plus protocol knobs."""

    corpus: str | Path
    confusion_sets: str | Path
    tagdict: str | Path
    systems: tuple[str, ...] = ("baseline", "bayes", "winnow")
    mode: str = "pruned"
    protocol: str = WITHIN
    test_corpus: str | Path | None = None
    seed: int = 0
    corrupt_pct: float = 5.0
    train_fraction: float = 0.8
    unsup_fraction: float = 0.6
    extraction: ExtractionParams = field(default_factory=ExtractionParams)
    winnow: WinnowParams = field(default_factory=WinnowParams)


def run_experiment(config: ExperimentConfig) -> EvalReport:
    """Run one protocol over every confusion set and assemble the report.

    within:   seeded train/test split of the corpus.
    across:   train on the training split of `corpus`, test on the held-out
              fraction of `test_corpus`.
    supunsup: like across, but the non-test fraction of `test_corpus` is
              corrupted and added to the training data.
    """
    if config.protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol: {config.protocol!r}")
    for name in config.systems:
        if name not in SYSTEMS:
            raise ValueError(f"unknown system: {name!r}")
    corpus = load_corpus(config.corpus)
    confusion_sets = load_confusion_sets(config.confusion_sets)
    tagdict = load_tag_dictionary(config.tagdict)
    if config.protocol == WITHIN:
        train, test = split_corpus(corpus, SplitSpec(config.train_fraction, config.seed))
        plans = [(cs, train, test) for cs in confusion_sets]
    else:
        if config.test_corpus is None:
            raise ValueError(f"protocol {config.protocol!r} needs a test corpus")
        test_corpus = load_corpus(config.test_corpus)
        train, _ = split_corpus(corpus, SplitSpec(config.train_fraction, config.seed))
        unsup, test = split_corpus(
            test_corpus, SplitSpec(config.unsup_fraction, config.seed)
        )
        plans = []
        for cs in confusion_sets:
            if config.protocol == ACROSS:
                plans.append((cs, train, test))
            else:
                noisy, _log = corrupt(unsup, cs, config.corrupt_pct, config.seed)
                plans.append((cs, list(train) + noisy, test))
    results = [
        evaluate_systems(
            cs_train, cs_test, cs, tagdict, config.systems,
            config.mode, config.extraction, config.winnow,
        )
        for cs, cs_train, cs_test in plans
    ]
    return EvalReport(tuple(config.systems), results)
