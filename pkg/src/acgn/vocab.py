"""Action commands, clause dictionaries, and one-hot clause encodings.

An action command is decomposed into fixed clause slots (verb, subject
attributes, relation, reference attributes). Each clause has its own word
dictionary with the reserved word "none" at index 0 for absent slots.
Word order also defines a single global index space used by the word
capsule bank; extending the vocabulary appends at the global end so
existing indices never move.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import VocabularyError

NONE_WORD = "none"
NOOP_VERB = "noop"

# clause-name aliases: (subject attr 1, subject attr 2, relation, ref attr 1, ref attr 2)
_SUBJECT_KIND = ("subject_shape", "subject_category")
_REFERENCE_KIND = ("reference_shape", "reference_category")
_RELATION = ("relation", "preposition")


@dataclass(frozen=True)
class ActionCommand:
    verb: str
    subject: Optional[tuple[str, str]] = None  # (shape_or_category, color)
    relation: Optional[str] = None
    reference: Optional[tuple[str, str]] = None

    def words(self) -> str:
        parts = [self.verb]
        if self.subject:
            parts.append(f"{self.subject[1]} {self.subject[0]}")
        if self.relation:
            parts.append(self.relation)
        if self.reference:
            parts.append(f"{self.reference[1]} {self.reference[0]}")
        return " ".join(parts)

    def to_json(self) -> dict:
        return {
            "verb": self.verb,
            "subject": list(self.subject) if self.subject else None,
            "relation": self.relation,
            "reference": list(self.reference) if self.reference else None,
        }

    @staticmethod
    def from_json(d: dict) -> "ActionCommand":
        return ActionCommand(
            verb=d["verb"],
            subject=tuple(d["subject"]) if d.get("subject") else None,
            relation=d.get("relation"),
            reference=tuple(d["reference"]) if d.get("reference") else None,
        )


NOOP = ActionCommand(NOOP_VERB)


@dataclass(frozen=True)
class Vocabulary:
    env_kind: str
    clauses: tuple[str, ...]
    words: dict[str, tuple[str, ...]]       # clause -> local dictionary
    entries: tuple[tuple[str, str], ...]    # global word order: (clause, word)

    @staticmethod
    def build(env_kind: str, clauses: dict[str, tuple[str, ...]]) -> "Vocabulary":
        for clause, wlist in clauses.items():
            if wlist[0] != NONE_WORD:
                raise VocabularyError(clause, NONE_WORD, "must be the first dictionary word")
            if len(set(wlist)) != len(wlist):
                raise VocabularyError(clause, wlist, "duplicate word")
        entries = tuple((c, w) for c in clauses for w in clauses[c])
        return Vocabulary(
            env_kind=env_kind,
            clauses=tuple(clauses),
            words={c: tuple(w) for c, w in clauses.items()},
            entries=entries,
        )

    @property
    def n_words(self) -> int:
        return len(self.entries)

    def clause_sizes(self) -> dict[str, int]:
        return {c: len(self.words[c]) for c in self.clauses}

    def global_index(self, clause: str, word: str) -> int:
        try:
            return self.entries.index((clause, word))
        except ValueError:
            raise VocabularyError(clause, word) from None

    def local_index(self, clause: str, word: str) -> int:
        try:
            return self.words[clause].index(word)
        except ValueError:
            raise VocabularyError(clause, word) from None

    def clause_word(self, cmd: ActionCommand, clause: str) -> str:
        if clause == "verb":
            return cmd.verb
        if clause in _RELATION:
            return cmd.relation or NONE_WORD
        if clause in _SUBJECT_KIND:
            return cmd.subject[0] if cmd.subject else NONE_WORD
        if clause == "subject_color":
            return cmd.subject[1] if cmd.subject else NONE_WORD
        if clause in _REFERENCE_KIND:
            return cmd.reference[0] if cmd.reference else NONE_WORD
        if clause == "reference_color":
            return cmd.reference[1] if cmd.reference else NONE_WORD
        raise VocabularyError(clause, "", "unknown clause")

    def extend(self, new_words: dict[str, list[str]]) -> "Vocabulary":
        """Append new words; existing local and global indices are preserved."""
        words = {c: list(w) for c, w in self.words.items()}
        appended = []
        for clause, wlist in new_words.items():
            if clause not in words:
                raise VocabularyError(clause, wlist, "unknown clause")
            for w in wlist:
                if w in words[clause]:
                    raise VocabularyError(clause, w, "already in dictionary")
                words[clause].append(w)
                appended.append((clause, w))
        return Vocabulary(
            env_kind=self.env_kind,
            clauses=self.clauses,
            words={c: tuple(w) for c, w in words.items()},
            entries=self.entries + tuple(appended),
        )

    def to_json(self) -> dict:
        return {
            "env_kind": self.env_kind,
            "clauses": list(self.clauses),
            "words": {c: list(w) for c, w in self.words.items()},
            "entries": [list(e) for e in self.entries],
        }

    @staticmethod
    def from_json(d: dict) -> "Vocabulary":
        return Vocabulary(
            env_kind=d["env_kind"],
            clauses=tuple(d["clauses"]),
            words={c: tuple(w) for c, w in d["words"].items()},
            entries=tuple((c, w) for c, w in d["entries"]),
        )


@dataclass
class ClauseEncoding:
    """One one-hot coupling vector per clause, over that clause's dictionary."""

    clauses: tuple[str, ...]
    onehots: dict[str, np.ndarray]

    def validate(self):
        for c in self.clauses:
            v = self.onehots[c]
            if not np.all((v == 0) | (v == 1)) or v.sum() != 1:
                raise VocabularyError(c, v.tolist(), "is not a one-hot vector")

    def local_indices(self) -> dict[str, int]:
        return {c: int(np.argmax(self.onehots[c])) for c in self.clauses}


def encode_labels(cmd: ActionCommand, vocab: Vocabulary) -> ClauseEncoding:
    """One one-hot vector per clause; absent slots map to the reserved word."""
    onehots = {}
    for clause in vocab.clauses:
        word = vocab.clause_word(cmd, clause)
        idx = vocab.local_index(clause, word)
        v = np.zeros(len(vocab.words[clause]), dtype=np.float32)
        v[idx] = 1.0
        onehots[clause] = v
    return ClauseEncoding(clauses=vocab.clauses, onehots=onehots)


def decode_labels(enc: ClauseEncoding, vocab: Vocabulary) -> ActionCommand:
    idx = enc.local_indices()
    get = lambda c: vocab.words[c][idx[c]]
    by_kind = {}
    for clause in vocab.clauses:
        if clause == "verb":
            by_kind["verb"] = get(clause)
        elif clause in _RELATION:
            by_kind["relation"] = get(clause)
        elif clause in _SUBJECT_KIND:
            by_kind["subject_kind"] = get(clause)
        elif clause == "subject_color":
            by_kind["subject_color"] = get(clause)
        elif clause in _REFERENCE_KIND:
            by_kind["reference_kind"] = get(clause)
        elif clause == "reference_color":
            by_kind["reference_color"] = get(clause)
    subject = None
    if by_kind["subject_kind"] != NONE_WORD:
        subject = (by_kind["subject_kind"], by_kind["subject_color"])
    reference = None
    if by_kind["reference_kind"] != NONE_WORD:
        reference = (by_kind["reference_kind"], by_kind["reference_color"])
    relation = by_kind["relation"] if by_kind["relation"] != NONE_WORD else None
    return ActionCommand(by_kind["verb"], subject, relation, reference)


def global_word_indices(cmd: ActionCommand, vocab: Vocabulary) -> np.ndarray:
    """Global word-bank index selected by each clause of cmd."""
    out = np.empty(len(vocab.clauses), dtype=np.int64)
    for i, clause in enumerate(vocab.clauses):
        out[i] = vocab.global_index(clause, vocab.clause_word(cmd, clause))
    return out
