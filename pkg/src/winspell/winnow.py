"""Winnow classifier clouds with weighted-majority voting.

Each confusion-set member gets a cloud of mistake-driven multiplicative
classifiers (one per demotion parameter); a comparator picks the member
whose cloud responds most strongly.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .bayes import BayesModel, smoothed_likelihood
from .corpus import ConfusionSet, confusion_set_from_text
from .features import BIAS, ExtractionParams, Feature, parse_feature_key

SPARSE = "sparse"
FULL = "full"
ONE_LAYER = "one_layer"
TWO_LAYER = "two_layer"
UNIFORM = "uniform"
BAYESIAN = "bayesian"

# Pseudo-feature active on every example; carries the prior under Bayesian
# initialization and otherwise trains like any connected feature.
BIAS_FEATURE = Feature(BIAS)

# Stand-in for log(0) when mapping likelihoods to weights.
ZERO_LIKELIHOOD_LOG = -500.0


@dataclass(frozen=True)
class WinnowParams:
    theta: float = 1.0
    alpha: float = 1.5
    betas: tuple[float, ...] = (0.5, 0.6, 0.7, 0.8, 0.9)
    default_weight: float = 0.1
    cycles: int = 5

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.alpha <= 1:
            raise ValueError("promotion parameter alpha must exceed 1")
        if not self.betas or any(not 0 < b < 1 for b in self.betas):
            raise ValueError("demotion parameters must lie in (0, 1)")
        if self.cycles < 1:
            raise ValueError("cycles must be >= 1")


@dataclass(frozen=True)
class GammaSchedule:
    """Vote-weight base, interpolated quadratically from start down to end
    over `horizon` examples."""

    start: float = 1.0
    end: float = 0.67
    horizon: int = 1000


def gamma_at(schedule: GammaSchedule, t: int) -> float:
    if t < 0:
        raise ValueError("example count must be non-negative")
    remaining = 1.0 - min(t / schedule.horizon, 1.0)
    return schedule.end + (schedule.start - schedule.end) * remaining * remaining


class WinnowClassifier:
    """One Winnow unit: sparse weight map, demotion parameter, mistake count.

    Sparse classifiers only hold weights for features connected by the
    positive-example rule; unconnected features contribute 0.
    """

    def __init__(
        self,
        beta: float,
        architecture: str = SPARSE,
        weights: Mapping[Feature, float] | None = None,
        mistakes: int = 0,
    ):
        if architecture not in (SPARSE, FULL):
            raise ValueError(f"unknown architecture: {architecture!r}")
        self.beta = beta
        self.architecture = architecture
        self.weights: dict[Feature, float] = dict(weights or {})
        self.mistakes = mistakes


def weighted_sum(classifier: WinnowClassifier, active_set: Iterable[Feature]) -> float:
    # Exactly-rounded sum: clouds holding permutations of the same weights
    # produce bit-identical totals, so comparator ties are real ties.
    return math.fsum(classifier.weights.get(f, 0.0) for f in active_set)


def winnow_predict(
    classifier: WinnowClassifier, active_set: Iterable[Feature], theta: float
) -> int:
    """1 iff the summed weights of connected active features exceed theta."""
    return 1 if weighted_sum(classifier, active_set) > theta else 0


def winnow_train_example(
    classifier: WinnowClassifier,
    active_set: Sequence[Feature],
    label: int,
    params: WinnowParams,
) -> int:
    """One online step; returns the pre-update prediction.

    A positive example first connects any unconnected active features (sparse
    mode) at the default weight; a mistaken prediction then promotes (missed
    positive) or demotes (false positive) every connected active weight.
    Negative examples never create connections.
    """
    if label == 1 and classifier.architecture == SPARSE:
        for f in active_set:
            if f not in classifier.weights:
                classifier.weights[f] = params.default_weight
    prediction = winnow_predict(classifier, active_set, params.theta)
    if prediction != label:
        factor = params.alpha if label == 1 else classifier.beta
        for f in active_set:
            if f in classifier.weights:
                classifier.weights[f] *= factor
        classifier.mistakes += 1
    return prediction


class Cloud:
    """The ensemble of classifiers representing one confusion-set member."""

    def __init__(self, member_index: int, classifiers: Sequence[WinnowClassifier]):
        if not classifiers:
            raise ValueError("cloud needs at least one classifier")
        self.member_index = member_index
        self.classifiers = list(classifiers)
        self.examples_seen = 0


def cloud_activation(
    cloud: Cloud,
    active_set: Iterable[Feature],
    params: WinnowParams,
    schedule: GammaSchedule,
) -> float:
    """Weighted-majority activation: votes weighted by gamma**mistakes and
    normalized, so the result lies in [0, 1]."""
    active = tuple(active_set)
    gamma = gamma_at(schedule, cloud.examples_seen)
    numerator = 0.0
    denominator = 0.0
    for classifier in cloud.classifiers:
        weight = gamma**classifier.mistakes
        numerator += weight * winnow_predict(classifier, active, params.theta)
        denominator += weight
    if denominator == 0.0:
        # All gamma**m underflowed; fall back to the plain vote fraction.
        votes = [winnow_predict(c, active, params.theta) for c in cloud.classifiers]
        return sum(votes) / len(votes)
    return numerator / denominator


@dataclass(frozen=True)
class WinnowDecision:
    activations: tuple[float, ...]
    chosen: int


class WinnowNetwork:
    """Clouds for every confusion-set member plus the comparator state."""

    def __init__(
        self,
        confusion_set: ConfusionSet,
        feature_universe: Iterable[Feature],
        params: WinnowParams | None = None,
        extraction: ExtractionParams | None = None,
        layer_mode: str = TWO_LAYER,
        architecture: str = SPARSE,
        priors: Sequence[float] | None = None,
        schedule: GammaSchedule | None = None,
    ):
        if layer_mode not in (ONE_LAYER, TWO_LAYER):
            raise ValueError(f"unknown layer mode: {layer_mode!r}")
        self.confusion_set = confusion_set
        self.feature_universe = tuple(sorted(feature_universe))
        self.params = params or WinnowParams()
        self.extraction = extraction or ExtractionParams()
        self.layer_mode = layer_mode
        self.init_mode = UNIFORM
        self.schedule = schedule or GammaSchedule()
        n = len(confusion_set.members)
        if priors is None:
            priors = [1.0 / n] * n
        if len(priors) != n:
            raise ValueError("priors do not match the confusion set")
        self.priors = tuple(priors)
        if layer_mode == ONE_LAYER:
            betas: tuple[float, ...] = (statistics.median(self.params.betas),)
        else:
            betas = self.params.betas
        self.clouds = [
            Cloud(i, [self._fresh_classifier(b, architecture) for b in betas])
            for i in range(n)
        ]

    def _fresh_classifier(self, beta: float, architecture: str) -> WinnowClassifier:
        weights = {BIAS_FEATURE: self.params.default_weight}
        if architecture == FULL:
            for f in self.feature_universe:
                weights[f] = self.params.default_weight
        return WinnowClassifier(beta, architecture, weights)

    @property
    def architecture(self) -> str:
        return self.clouds[0].classifiers[0].architecture

    @property
    def n_members(self) -> int:
        return len(self.confusion_set.members)


def _with_bias(active_set: Iterable[Feature]) -> tuple[Feature, ...]:
    return (BIAS_FEATURE,) + tuple(f for f in active_set if f.kind != BIAS)


def cloud_output(network: WinnowNetwork, cloud: Cloud, active: Sequence[Feature]) -> float:
    """What the comparator sees: the raw weighted sum in one-layer mode, the
    weighted-majority activation in two-layer mode."""
    if network.layer_mode == ONE_LAYER:
        return weighted_sum(cloud.classifiers[0], active)
    return cloud_activation(cloud, active, network.params, network.schedule)


def classify_winnow(
    network: WinnowNetwork, active_set: Iterable[Feature]
) -> WinnowDecision:
    """Pick the member with the highest cloud output; ties go to the larger
    training prior, then the lower member index. The bias pseudo-feature is
    added to the active set automatically."""
    active = _with_bias(active_set)
    activations = tuple(cloud_output(network, cloud, active) for cloud in network.clouds)
    chosen = max(
        range(network.n_members),
        key=lambda i: (activations[i], network.priors[i], -i),
    )
    return WinnowDecision(activations, chosen)


def train_network(
    network: WinnowNetwork,
    stream: Iterable[tuple[Sequence[Feature], int]],
    cycles: int | None = None,
):
    """Online training over (active set, correct member) examples.

    Each example is positive for the correct member's cloud and negative for
    every other cloud; all classifiers in a cloud see it. The stream is
    replayed in order for the configured number of cycles, and the vote
    schedule horizon is fixed at the total number of presentations.
    """
    examples = list(stream)
    if cycles is None:
        cycles = network.params.cycles
    if not examples:
        return
    network.schedule = GammaSchedule(
        network.schedule.start, network.schedule.end, cycles * len(examples)
    )
    for _ in range(cycles):
        for active_set, member in examples:
            active = _with_bias(active_set)
            for cloud in network.clouds:
                label = 1 if cloud.member_index == member else 0
                for classifier in cloud.classifiers:
                    winnow_train_example(classifier, active, label, network.params)
                cloud.examples_seen += 1


def init_bayesian(network: WinnowNetwork, model: BayesModel):
    """Seed a full network with log-likelihood weights.

    Cloud i's weight for feature f is log(smoothed likelihood) plus one
    global constant chosen so every weight is non-negative; log(0) is floored
    at -500. The bias pseudo-feature carries the log prior. An untrained
    one-layer network initialized this way reproduces the Bayesian decision.
    """
    if network.architecture != FULL:
        raise ValueError("Bayesian initialization requires a full network")
    if set(network.feature_universe) != set(model.features):
        raise ValueError("network and model feature sets differ")
    raw: list[dict[Feature, float]] = []
    for i in range(network.n_members):
        weights = {BIAS_FEATURE: _floored_log(model.priors[i])}
        for f in network.feature_universe:
            weights[f] = _floored_log(smoothed_likelihood(model, f, i))
        raw.append(weights)
    shift = -min(w for weights in raw for w in weights.values())
    for cloud in network.clouds:
        for classifier in cloud.classifiers:
            classifier.weights = {
                f: w + shift for f, w in raw[cloud.member_index].items()
            }
    network.priors = model.priors
    network.init_mode = BAYESIAN


def _floored_log(x: float) -> float:
    return math.log(x) if x > 0.0 else ZERO_LIKELIHOOD_LOG


def sparsify(network: WinnowNetwork, counts: Mapping[Feature, Sequence[int]]):
    """Switch to the sparse architecture, dropping every link whose feature
    never co-occurred with the cloud's member during training."""
    def demonstrated(f: Feature, member_index: int) -> bool:
        row = counts.get(f)
        return row is not None and row[member_index] > 0

    for cloud in network.clouds:
        for classifier in cloud.classifiers:
            classifier.weights = {
                f: w
                for f, w in classifier.weights.items()
                if f.kind == BIAS or demonstrated(f, cloud.member_index)
            }
            classifier.architecture = SPARSE


# ---------------------------------------------------------------------------
# Serialization: "WINNOW v1", line-based, tab-separated. Weight rows refer to
# the feature list by index (-1 is the bias pseudo-feature) and print weights
# as shortest round-trip decimals; save -> load -> save is byte-identical.
# ---------------------------------------------------------------------------

_HEADER = "WINNOW v1"


def network_to_text(network: WinnowNetwork) -> str:
    p = network.params
    lines = [_HEADER]
    lines.append("members\t" + "\t".join(
        network.confusion_set.member_text(i) for i in range(network.n_members)
    ))
    lines.append(f"extraction\tk={network.extraction.k}\tl={network.extraction.l}")
    lines.append(
        f"winnow\ttheta={p.theta!r}\talpha={p.alpha!r}"
        f"\tdefault_weight={p.default_weight!r}\tcycles={p.cycles}"
    )
    lines.append("betas\t" + "\t".join(repr(b) for b in p.betas))
    lines.append(f"layer\t{network.layer_mode}")
    lines.append(f"architecture\t{network.architecture}")
    lines.append(f"init\t{network.init_mode}")
    s = network.schedule
    lines.append(f"schedule\tstart={s.start!r}\tend={s.end!r}\thorizon={s.horizon}")
    lines.append("priors\t" + "\t".join(repr(pr) for pr in network.priors))
    lines.append(f"features\t{len(network.feature_universe)}")
    index = {f: i for i, f in enumerate(network.feature_universe)}
    index[BIAS_FEATURE] = -1
    for f in network.feature_universe:
        lines.append(f.key())
    for cloud in network.clouds:
        lines.append(f"cloud\t{cloud.member_index}\texamples_seen={cloud.examples_seen}")
        for classifier in cloud.classifiers:
            lines.append(
                f"classifier\tbeta={classifier.beta!r}\tmistakes={classifier.mistakes}"
            )
            rows = sorted((index[f], w) for f, w in classifier.weights.items())
            for fi, w in rows:
                lines.append(f"{fi}\t{w!r}")
    return "\n".join(lines) + "\n"


def network_from_text(text: str) -> WinnowNetwork:
    lines = text.splitlines()
    if not lines or lines[0] != _HEADER:
        raise ValueError("not a WINNOW v1 model file")
    head = {}
    for line in lines[1:11]:
        name, *values = line.split("\t")
        head[name] = values
    confusion_set = confusion_set_from_text(", ".join(head["members"]))
    k, l = (int(v.split("=", 1)[1]) for v in head["extraction"])
    wfields = dict(v.split("=", 1) for v in head["winnow"])
    params = WinnowParams(
        theta=float(wfields["theta"]),
        alpha=float(wfields["alpha"]),
        betas=tuple(float(b) for b in head["betas"]),
        default_weight=float(wfields["default_weight"]),
        cycles=int(wfields["cycles"]),
    )
    sfields = dict(v.split("=", 1) for v in head["schedule"])
    schedule = GammaSchedule(
        float(sfields["start"]), float(sfields["end"]), int(sfields["horizon"])
    )
    n_features = int(head["features"][0])
    feature_lines = lines[11 : 11 + n_features]
    features = [parse_feature_key(key) for key in feature_lines]
    network = WinnowNetwork(
        confusion_set,
        features,
        params,
        ExtractionParams(k, l),
        layer_mode=head["layer"][0],
        architecture=head["architecture"][0],
        priors=[float(pr) for pr in head["priors"]],
        schedule=schedule,
    )
    network.init_mode = head["init"][0]
    by_index = dict(enumerate(features))
    by_index[-1] = BIAS_FEATURE
    cloud = None
    classifier = None
    architecture = head["architecture"][0]
    for line in lines[11 + n_features :]:
        fields = line.split("\t")
        if fields[0] == "cloud":
            cloud = network.clouds[int(fields[1])]
            cloud.examples_seen = int(fields[2].split("=", 1)[1])
            cloud.classifiers = []
        elif fields[0] == "classifier":
            if cloud is None:
                raise ValueError("classifier outside any cloud")
            classifier = WinnowClassifier(
                beta=float(fields[1].split("=", 1)[1]),
                architecture=architecture,
                mistakes=int(fields[2].split("=", 1)[1]),
            )
            cloud.classifiers.append(classifier)
        else:
            if classifier is None:
                raise ValueError("weight row outside any classifier")
            classifier.weights[by_index[int(fields[0])]] = float(fields[1])
    return network


def save_network(network: WinnowNetwork, path: str | Path):
    Path(path).write_text(network_to_text(network), encoding="utf-8")


def load_network(path: str | Path) -> WinnowNetwork:
    return network_from_text(Path(path).read_text(encoding="utf-8"))
