"""Naive-Bayes hybrid classifier: interpolated likelihoods with a chi-square
mixing weight, plus heuristic dependency resolution."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import ConfusionSet, confusion_set_from_text
from .features import (
    COLLOCATION,
    ExtractionParams,
    Feature,
    FeatureStats,
    PruningPolicy,
    chi_square_2x2,
    parse_feature_key,
    prune,
)

INTERPOLATIVE = "interpolative"
MLE_ONLY = "mle"


@dataclass(frozen=True)
class Posterior:
    """Per-member log scores and the chosen member index."""

    scores: tuple[float, ...]
    chosen: int


class BayesModel:
    """Priors, likelihood tables, and smoothing state for one confusion set.

    All derived tables (priors, MLE likelihoods, unigrams, mixing weights)
    are recomputed from the raw counts, so a serialized model reloads
    exactly.
    """

    def __init__(
        self,
        confusion_set: ConfusionSet,
        params: ExtractionParams,
        counts: dict[Feature, Sequence[int]],
        occurrences: Sequence[int],
        smoothing: str = INTERPOLATIVE,
        dependency_resolution: bool = True,
    ):
        if smoothing not in (INTERPOLATIVE, MLE_ONLY):
            raise ValueError(f"unknown smoothing mode: {smoothing!r}")
        if len(occurrences) != len(confusion_set.members):
            raise ValueError("occurrence counts do not match the confusion set")
        self.confusion_set = confusion_set
        self.params = params
        self.features = tuple(sorted(counts))
        self.counts = {f: tuple(counts[f]) for f in self.features}
        self.occurrences = tuple(occurrences)
        self.total = sum(occurrences)
        if self.total <= 0:
            raise ValueError("model needs at least one training occurrence")
        self.smoothing = smoothing
        self.dependency_resolution = dependency_resolution
        self._feature_set = frozenset(self.features)

        self.priors = tuple(n / self.total for n in self.occurrences)
        self.p_ml: dict[Feature, tuple[float, ...]] = {}
        self.p_unigram: dict[Feature, float] = {}
        self.lam: dict[Feature, tuple[float, ...]] = {}
        self.mean_lambda: dict[Feature, float] = {}
        for f in self.features:
            row = self.counts[f]
            self.p_ml[f] = tuple(
                row[i] / n if n else 0.0 for i, n in enumerate(self.occurrences)
            )
            self.p_unigram[f] = sum(row) / self.total
            self.lam[f] = tuple(
                chi_square_2x2(*self._table(f, i))[1] for i in range(self.n_members)
            )
            self.mean_lambda[f] = sum(self.lam[f]) / self.n_members

    @property
    def n_members(self) -> int:
        return len(self.confusion_set.members)

    def _table(self, feature: Feature, member_index: int):
        a = self.counts[feature][member_index]
        b = sum(self.counts[feature]) - a
        c = self.occurrences[member_index] - a
        d = (self.total - self.occurrences[member_index]) - b
        return a, b, c, d

    def is_retained(self, feature: Feature) -> bool:
        return feature in self._feature_set


def train_bayes(
    stats: FeatureStats,
    policy: PruningPolicy,
    smoothing: str = INTERPOLATIVE,
    dependency_resolution: bool = True,
    retained: Iterable[Feature] | None = None,
) -> BayesModel:
    """Build a model from corpus statistics, pruning per ``policy`` unless a
    retained feature set is supplied."""
    if retained is None:
        retained = prune(stats, policy)
    counts = {f: stats.counts[f] for f in retained}
    for i, n in enumerate(stats.occurrences):
        if n == 0:
            warnings.warn(
                f"no training occurrences of "
                f"{stats.confusion_set.member_text(i)!r}; its prior is 0",
                stacklevel=2,
            )
    return BayesModel(
        stats.confusion_set,
        stats.params,
        counts,
        stats.occurrences,
        smoothing,
        dependency_resolution,
    )


def smoothed_likelihood(model: BayesModel, feature: Feature, member_index: int) -> float:
    """(1 - lambda) * P_ML(f|Wi) + lambda * P_ML(f), where lambda is the
    chi-square probability that the f/Wi association is due to chance;
    MLE-only mode returns the raw likelihood."""
    if not model.is_retained(feature):
        raise ValueError(f"feature not retained by this model: {feature.key()}")
    ml = model.p_ml[feature][member_index]
    if model.smoothing == MLE_ONLY:
        return ml
    lam = model.lam[feature][member_index]
    return (1.0 - lam) * ml + lam * model.p_unigram[feature]


def resolve_dependencies(
    model: BayesModel, active_set: Iterable[Feature]
) -> tuple[Feature, ...]:
    """Reduce the active set before the naive-Bayes product.

    Collocations whose offset spans overlap are treated as strongly
    dependent; within each overlap-connected group only the feature with the
    lowest mean mixing weight (the strongest association) survives, ties
    going to canonical order. Context-word features are never deleted. With
    dependency resolution off, the input is returned unchanged.
    """
    active = tuple(sorted(active_set))
    if not model.dependency_resolution:
        return active
    collocations = [f for f in active if f.kind == COLLOCATION]
    if len(collocations) <= 1:
        return active
    # Connected components under span overlap.
    component_of = list(range(len(collocations)))

    def find(i: int) -> int:
        while component_of[i] != i:
            component_of[i] = component_of[component_of[i]]
            i = component_of[i]
        return i

    for i, fi in enumerate(collocations):
        for j in range(i + 1, len(collocations)):
            if set(fi.offsets) & set(collocations[j].offsets):
                component_of[find(i)] = find(j)
    groups: dict[int, list[Feature]] = {}
    for i, f in enumerate(collocations):
        groups.setdefault(find(i), []).append(f)
    survivors = {
        min(group, key=lambda f: (model.mean_lambda[f], f)) for group in groups.values()
    }
    return tuple(
        f for f in active if f.kind != COLLOCATION or f in survivors
    )


def classify_bayes(model: BayesModel, active_set: Iterable[Feature]) -> Posterior:
    """Log-space posterior over members; the normalizing constant is omitted.

    Ties break toward the larger prior, then the lower member index. If every
    member scores -inf (possible with MLE likelihoods), the prior alone
    decides.
    """
    reduced = resolve_dependencies(model, active_set)
    scores = []
    for i in range(model.n_members):
        terms = [_log(model.priors[i])]
        terms.extend(_log(smoothed_likelihood(model, f, i)) for f in reduced)
        # fsum is exactly rounded, so members with identical term multisets
        # tie exactly and fall through to the prior rule.
        scores.append(math.fsum(terms))
    if all(s == float("-inf") for s in scores):
        chosen = max(range(model.n_members), key=lambda i: (model.priors[i], -i))
    else:
        chosen = max(
            range(model.n_members), key=lambda i: (scores[i], model.priors[i], -i)
        )
    return Posterior(tuple(scores), chosen)


def _log(x: float) -> float:
    return math.log(x) if x > 0.0 else float("-inf")


# ---------------------------------------------------------------------------
# Serialization: "BAYES v1", line-based, tab-separated. Derived tables are
# recomputed on load; save -> load -> save is byte-identical.
# ---------------------------------------------------------------------------

_HEADER = "BAYES v1"


def model_to_text(model: BayesModel) -> str:
    lines = [_HEADER]
    lines.append("members\t" + "\t".join(
        model.confusion_set.member_text(i) for i in range(model.n_members)
    ))
    lines.append(f"extraction\tk={model.params.k}\tl={model.params.l}")
    lines.append(f"smoothing\t{model.smoothing}")
    lines.append(
        "dependency_resolution\t" + ("on" if model.dependency_resolution else "off")
    )
    lines.append("occurrences\t" + "\t".join(str(n) for n in model.occurrences))
    lines.append("priors\t" + "\t".join(repr(p) for p in model.priors))
    lines.append(f"features\t{len(model.features)}")
    for f in model.features:
        lines.append(f.key() + "\t" + "\t".join(str(c) for c in model.counts[f]))
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> BayesModel:
    lines = text.splitlines()
    if not lines or lines[0] != _HEADER:
        raise ValueError("not a BAYES v1 model file")
    fields = _parse_sections(lines[1:8])
    confusion_set = confusion_set_from_text(", ".join(fields["members"]))
    k, l = (int(v.split("=", 1)[1]) for v in fields["extraction"])
    occurrences = [int(n) for n in fields["occurrences"]]
    n_features = int(fields["features"][0])
    counts: dict[Feature, list[int]] = {}
    for line in lines[8 : 8 + n_features]:
        key, *row = line.split("\t")
        counts[parse_feature_key(key)] = [int(c) for c in row]
    if len(counts) != n_features:
        raise ValueError("model file truncated or has duplicate features")
    return BayesModel(
        confusion_set,
        ExtractionParams(k, l),
        counts,
        occurrences,
        smoothing=fields["smoothing"][0],
        dependency_resolution=fields["dependency_resolution"][0] == "on",
    )


def _parse_sections(lines: Sequence[str]) -> dict[str, list[str]]:
    fields = {}
    for line in lines:
        name, *values = line.split("\t")
        fields[name] = values
    expected = {
        "members",
        "extraction",
        "smoothing",
        "dependency_resolution",
        "occurrences",
        "priors",
        "features",
    }
    if set(fields) != expected:
        raise ValueError("malformed model file header")
    return fields


def save_model(model: BayesModel, path: str | Path):
    Path(path).write_text(model_to_text(model), encoding="utf-8")


def load_model(path: str | Path) -> BayesModel:
    return model_from_text(Path(path).read_text(encoding="utf-8"))
