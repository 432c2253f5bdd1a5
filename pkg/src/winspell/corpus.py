"""Corpus handling: tokenization, confusion sets, tag dictionaries, and
seeded corruption of confusion-set occurrences."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

UNKNOWN_TAG = "UNK"

# Words (with internal apostrophes, so contractions stay whole) or single
# non-space punctuation characters.
_TOKEN_RE = re.compile(r"\w+(?:['’]\w+)*|[^\w\s]")

# Naive raw-mode splitter: sentence ends at [.?!] followed by whitespace and
# a capital letter.
_SENTENCE_BREAK_RE = re.compile(r"(?<=[.?!])\s+(?=[A-Z])")


class CorpusError(Exception):
    """Raised for unreadable or malformed corpus inputs."""


@dataclass(frozen=True)
class Token:
    surface: str
    position: int


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    source_line: int = 0

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


def sentence_from_surfaces(surfaces: Iterable[str], source_line: int = 0) -> Sentence:
    return Sentence(tuple(Token(s, i) for i, s in enumerate(surfaces)), source_line)


def tokenize(text: str, source_line: int = 0) -> Sentence:
    """Lowercase ``text`` and split it into tokens.

    Punctuation marks become standalone tokens; internal apostrophes are kept
    so contractions ("don't", "it's") remain single tokens. Empty or
    whitespace-only input yields an empty sentence.
    """
    return sentence_from_surfaces(_TOKEN_RE.findall(text.lower()), source_line)


@dataclass(frozen=True)
class ConfusionSet:
    """An ordered set of mutually confusable word forms.

    Each member is a tuple of one or more tokens ("may be" is two tokens).
    """

    members: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValueError("confusion set needs at least 2 members")
        if len(set(self.members)) != len(self.members):
            raise ValueError("confusion-set members must be distinct")
        for member in self.members:
            if not member or any(not tok for tok in member):
                raise ValueError("confusion-set members must be non-empty")
            if any(tok != tok.lower() for tok in member):
                raise ValueError("confusion-set members must be lowercase")

    def member_text(self, index: int) -> str:
        return " ".join(self.members[index])

    @property
    def label(self) -> str:
        return ", ".join(self.member_text(i) for i in range(len(self.members)))

    @property
    def slug(self) -> str:
        """Filesystem-safe identifier, e.g. "maybe+may-be"."""
        return "+".join("-".join(m) for m in self.members)


def confusion_set_from_text(line: str) -> ConfusionSet:
    """Parse a comma-separated member list, e.g. "maybe, may be"."""
    members = []
    for part in line.split(","):
        tokens = tokenize(part).surfaces
        if tokens:
            members.append(tokens)
    return ConfusionSet(tuple(members))


def load_confusion_sets(path: str | Path) -> list[ConfusionSet]:
    """One confusion set per line; '#' starts a comment line."""
    sets = []
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            sets.append(confusion_set_from_text(stripped))
        except ValueError as exc:
            raise CorpusError(f"{path}: line {lineno}: {exc}") from exc
    return sets


class TagDictionary:
    """Map from word surface to its set of part-of-speech tags.

    Unknown words fall back to the singleton {UNK}.
    """

    def __init__(self, entries: dict[str, frozenset[str]] | None = None):
        self._entries: dict[str, frozenset[str]] = {}
        for word, tags in (entries or {}).items():
            tagset = frozenset(tags)
            if not tagset:
                raise ValueError(f"tag dictionary entry for {word!r} has no tags")
            self._entries[word] = tagset

    def lookup(self, word: str) -> frozenset[str]:
        return self._entries.get(word, frozenset({UNKNOWN_TAG}))

    def __len__(self) -> int:
        return len(self._entries)


def tagset_lookup(dictionary: TagDictionary, word: str) -> frozenset[str]:
    return dictionary.lookup(word)


def load_tag_dictionary(path: str | Path) -> TagDictionary:
    """One entry per line: ``word<TAB>tag1,tag2,...``."""
    entries: dict[str, frozenset[str]] = {}
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            word, tags = line.split("\t")
            entries[word] = frozenset(t.strip() for t in tags.split(",") if t.strip())
            if not entries[word]:
                raise ValueError("entry has no tags")
        except ValueError as exc:
            raise CorpusError(f"{path}: line {lineno}: malformed tag entry: {exc}") from exc
    return TagDictionary(entries)


def _read_text(path: str | Path) -> str:
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        lineno = data[: exc.start].count(b"\n") + 1
        raise CorpusError(f"{path}: invalid UTF-8 on line {lineno}") from exc


def load_corpus(path: str | Path, mode: str = "presplit") -> list[Sentence]:
    """Load a plain-text corpus.

    ``presplit`` mode treats each non-blank line as one sentence. ``raw``
    mode splits on [.?!] followed by whitespace and a capital letter.
    """
    if mode not in ("presplit", "raw"):
        raise ValueError(f"unknown corpus mode: {mode!r}")
    text = _read_text(path)
    sentences = []
    if mode == "presplit":
        for lineno, line in enumerate(text.splitlines(), start=1):
            if line.strip():
                sentences.append(tokenize(line, lineno))
        return sentences
    pos = 0
    for match in _SENTENCE_BREAK_RE.finditer(text):
        _append_raw_sentence(sentences, text, pos, match.start())
        pos = match.end()
    _append_raw_sentence(sentences, text, pos, len(text))
    return sentences


def _append_raw_sentence(sentences: list[Sentence], text: str, start: int, end: int):
    chunk = text[start:end]
    if chunk.strip():
        sentences.append(tokenize(chunk, text.count("\n", 0, start) + 1))


@dataclass(frozen=True)
class Occurrence:
    sentence: Sentence
    span_start: int
    span_len: int
    member_index: int

    @property
    def span_end(self) -> int:
        return self.span_start + self.span_len


def _match_sentence(surfaces: Sequence[str], confusion_set: ConfusionSet):
    """Yield (start, length, member_index) for maximal non-overlapping
    matches, scanning left to right with longest member preferred."""
    by_length = sorted(
        range(len(confusion_set.members)),
        key=lambda i: -len(confusion_set.members[i]),
    )
    i = 0
    n = len(surfaces)
    while i < n:
        for mi in by_length:
            member = confusion_set.members[mi]
            if tuple(surfaces[i : i + len(member)]) == member:
                yield i, len(member), mi
                i += len(member)
                break
        else:
            i += 1


def find_occurrences(
    sentences: Sequence[Sentence], confusion_set: ConfusionSet
) -> list[Occurrence]:
    """All confusion-set occurrences, in corpus order."""
    out = []
    for sent in sentences:
        for start, length, mi in _match_sentence(sent.surfaces, confusion_set):
            out.append(Occurrence(sent, start, length, mi))
    return out


@dataclass(frozen=True)
class CorruptionEntry:
    """One flipped occurrence; span_start indexes into the corrupted corpus."""

    sentence_index: int
    span_start: int
    old_member: int
    new_member: int


def corrupt(
    sentences: Sequence[Sentence],
    confusion_set: ConfusionSet,
    pct: float,
    seed: int,
) -> tuple[list[Sentence], list[CorruptionEntry]]:
    """Flip a random ~pct% of occurrences to a different member.

    Each occurrence is selected independently with probability pct/100 by a
    PRNG seeded with ``seed``; a selected span is replaced by a uniformly
    random *other* member. Returns the corrupted sentences and a change log;
    ``restore`` applied to the log undoes the corruption exactly.
    """
    if not 0 <= pct <= 100:
        raise ValueError(f"corruption percentage out of range: {pct}")
    if len(confusion_set.members) < 2:
        raise ValueError("corruption needs a confusion set with >= 2 members")
    rng = random.Random(seed)
    probability = pct / 100.0
    corrupted: list[Sentence] = []
    log: list[CorruptionEntry] = []
    for si, sent in enumerate(sentences):
        matches = list(_match_sentence(sent.surfaces, confusion_set))
        if not matches:
            corrupted.append(sent)
            continue
        new_surfaces: list[str] = []
        cursor = 0
        for start, length, mi in matches:
            new_surfaces.extend(sent.surfaces[cursor:start])
            if rng.random() < probability:
                other = rng.randrange(len(confusion_set.members) - 1)
                if other >= mi:
                    other += 1
                log.append(CorruptionEntry(si, len(new_surfaces), mi, other))
                new_surfaces.extend(confusion_set.members[other])
            else:
                new_surfaces.extend(confusion_set.members[mi])
            cursor = start + length
        new_surfaces.extend(sent.surfaces[cursor:])
        corrupted.append(sentence_from_surfaces(new_surfaces, sent.source_line))
    return corrupted, log


def restore(
    sentences: Sequence[Sentence],
    confusion_set: ConfusionSet,
    log: Sequence[CorruptionEntry],
) -> list[Sentence]:
    """Undo ``corrupt`` by re-applying the change log in reverse."""
    result = list(sentences)
    for entry in reversed(log):
        sent = result[entry.sentence_index]
        new_member = confusion_set.members[entry.new_member]
        old_member = confusion_set.members[entry.old_member]
        surfaces = list(sent.surfaces)
        span = tuple(surfaces[entry.span_start : entry.span_start + len(new_member)])
        if span != new_member:
            raise ValueError(
                f"change log does not match corpus at sentence "
                f"{entry.sentence_index}, token {entry.span_start}"
            )
        surfaces[entry.span_start : entry.span_start + len(new_member)] = old_member
        result[entry.sentence_index] = sentence_from_surfaces(surfaces, sent.source_line)
    return result
