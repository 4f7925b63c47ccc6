"""Finite words over the alphabet {1, ..., n} and their integer codec.

Words index the canonical isometries of the Cuntz algebra O_n: a word
alpha = a_1 a_2 ... a_k names the product isometry S_alpha = S_{a_1} ... S_{a_k}.
Everything downstream (normal forms, permutation tables, censuses) keys off
the bijection between length-k words and {0, ..., n^k - 1}, so the codec here
is the single source of truth for that ordering.

The encoding is big-endian base n with 0-based digits:

    index(a_1 ... a_k) = sum_i (a_i - 1) * n^(k - i)

so index(1^k) = 0, index(n^k word n...n) = n^k - 1, and dropping the last
letter of a word is integer division of its index by n. Indices are kept
inside one machine word: words with n^k > 2^63 are rejected outright rather
than silently promoted to big integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Tuple

# Index space must fit a signed 64-bit integer; longer words are refused.
MAX_INDEX = 2**63


def check_alphabet(n: int) -> None:
    """Reject alphabet sizes below 2; O_1 and smaller are out of scope."""
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"alphabet size must be an integer >= 2, got {n!r}")


def max_length(n: int) -> int:
    """Largest word length k with n^k <= 2^63 for this alphabet."""
    check_alphabet(n)
    k = 0
    cap = MAX_INDEX
    while cap >= n:
        cap //= n
        k += 1
    return k


def check_word(n: int, letters: Tuple[int, ...]) -> None:
    """Validate letters 1..n and enforce the packed-index length cap."""
    check_alphabet(n)
    if n ** len(letters) > MAX_INDEX:
        raise ValueError(
            f"word of length {len(letters)} over {n} letters exceeds the "
            f"packed index range (max length {max_length(n)})"
        )
    for a in letters:
        if not isinstance(a, int) or not (1 <= a <= n):
            raise ValueError(f"letter {a!r} outside 1..{n}")


def word_index(n: int, letters: Tuple[int, ...]) -> int:
    """Index of a word in the length-graded ordering: big-endian base n."""
    idx = 0
    for a in letters:
        idx = idx * n + (a - 1)
    return idx


def word_from_index(n: int, k: int, idx: int) -> Tuple[int, ...]:
    """Inverse of word_index at fixed length k."""
    if not (0 <= idx < n**k):
        raise ValueError(f"index {idx} out of range for length {k} over {n} letters")
    letters = [0] * k
    for pos in range(k - 1, -1, -1):
        letters[pos] = idx % n + 1
        idx //= n
    return tuple(letters)


def enumerate_words(n: int, k: int) -> Iterator[Tuple[int, ...]]:
    """All length-k words in index order (lexicographic)."""
    check_word(n, (1,) * k if k else ())
    for idx in range(n**k):
        yield word_from_index(n, k, idx)


def word_to_string(letters: Tuple[int, ...]) -> str:
    """Digit string of a word; the empty word prints as the empty string.

    Letters above 9 are comma-separated so the string stays unambiguous.
    """
    if any(a > 9 for a in letters):
        return ",".join(str(a) for a in letters)
    return "".join(str(a) for a in letters)


def word_from_string(n: int, text: str) -> Tuple[int, ...]:
    """Parse a digit string (comma-separated for alphabets past 9)."""
    if text == "":
        letters: Tuple[int, ...] = ()
    elif "," in text:
        letters = tuple(int(part) for part in text.split(","))
    else:
        letters = tuple(int(ch) for ch in text)
    check_word(n, letters)
    return letters


@dataclass(frozen=True)
class Word:
    """An immutable word over {1, ..., n}; the unit of O_n bookkeeping.

    Instances validate on construction, so any Word in flight is well
    formed. The empty word (length 0) stands for the algebra unit when it
    appears as a monomial index.
    """

    n: int
    letters: Tuple[int, ...]

    def __post_init__(self) -> None:
        check_word(self.n, self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return word_to_string(self.letters)

    @property
    def index(self) -> int:
        return word_index(self.n, self.letters)

    @staticmethod
    def from_index(n: int, k: int, idx: int) -> "Word":
        return Word(n, word_from_index(n, k, idx))

    @staticmethod
    def from_string(n: int, text: str) -> "Word":
        return Word(n, word_from_string(n, text))

    def concat(self, other: "Word") -> "Word":
        if other.n != self.n:
            raise ValueError("cannot concatenate words over different alphabets")
        return Word(self.n, self.letters + other.letters)

    def drop_last(self) -> "Word":
        if not self.letters:
            raise ValueError("empty word has no last letter")
        return Word(self.n, self.letters[:-1])
