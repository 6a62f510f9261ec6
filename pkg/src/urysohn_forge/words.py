"""Words in a free group, stored as ``(generator, +1|-1)`` letters.

Single-letter generator names can be written compactly with upper case for
inverses (``"abAB"`` is the commutator ``a b a^-1 b^-1``); longer names use
space separated tokens with an optional ``^-1`` suffix (``"h1 h2 h1^-1"``).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

from .errors import PreconditionError

Letter = tuple[str, int]


@dataclass(frozen=True)
class FreeWord:
    letters: tuple[Letter, ...]

    @classmethod
    def parse(cls, text: str) -> "FreeWord":
        text = text.strip()
        if not text:
            return cls(())
        if " " in text or "^" in text or any(ch.isdigit() for ch in text):
            letters = []
            for tok in text.split():
                if tok.endswith("^-1"):
                    letters.append((tok[:-3], -1))
                else:
                    letters.append((tok, 1))
            return cls(tuple(letters))
        if not text.isalpha():
            raise ValueError(f"cannot parse word {text!r}")
        return cls(tuple((ch.lower(), -1 if ch.isupper() else 1) for ch in text))

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        if all(len(g) == 1 for g, _ in self.letters):
            return "".join(g if e > 0 else g.upper() for g, e in self.letters)
        return " ".join(g if e > 0 else f"{g}^-1" for g, e in self.letters)

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple((g, -e) for g, e in reversed(self.letters)))

    def generators(self) -> set[str]:
        return {g for g, _ in self.letters}

    def is_reduced(self) -> bool:
        return all(not (x[0] == y[0] and x[1] == -y[1]) for x, y in zip(self.letters, self.letters[1:]))

    def is_cyclically_reduced(self) -> bool:
        if not self.is_reduced():
            return False
        if len(self.letters) < 2:
            return True
        first, last = self.letters[0], self.letters[-1]
        return not (first[0] == last[0] and first[1] == -last[1])

    def reduced(self) -> "FreeWord":
        out: list[Letter] = []
        for g, e in self.letters:
            if out and out[-1][0] == g and out[-1][1] == -e:
                out.pop()
            else:
                out.append((g, e))
        return FreeWord(tuple(out))


def require_cyclically_reduced(words: Sequence[FreeWord]) -> None:
    for w in words:
        if not w.letters:
            raise PreconditionError("the empty word is not allowed", {})
        if not w.is_cyclically_reduced():
            raise PreconditionError(f"word {w} is not cyclically reduced", {"word": str(w)})


def cyclically_reduced_words(generators: Sequence[str], max_length: int | None = None) -> Iterator[FreeWord]:
    """Non-empty cyclically reduced words by length, then lexicographically
    (generators in the given order, each before its inverse)."""
    alphabet = [(g, e) for g in generators for e in (1, -1)]
    length = 1
    while max_length is None or length <= max_length:
        for letters in product(alphabet, repeat=length):
            w = FreeWord(letters)
            if w.is_cyclically_reduced():
                yield w
        length += 1
