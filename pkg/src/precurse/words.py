"""Free-group words and elements of direct products of two free groups.

Letters are stored as signed integers: generator ``i`` of an alphabet is
``i + 1`` and its inverse is ``-(i + 1)``.  A :class:`ReducedWord` wraps a
tuple of such letters together with its :class:`Alphabet`; the hot loops in
:mod:`precurse.ring` and :mod:`precurse.automaton` work on the raw tuples
through :func:`free_reduce`, :func:`mul_letters` and :func:`inv_letters`.

Text syntax is whitespace-separated generator names with an optional
``^-1`` suffix, e.g. ``s2^-1 1x^-1 0y s2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import AlphabetMismatch


@dataclass(frozen=True)
class Alphabet:
    """A free basis with fixed, named generators."""

    name: str
    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate generator names in alphabet {self.name}")
        for g in self.names:
            if not g or any(c.isspace() for c in g) or g.endswith("^-1") or g == "1":
                raise ValueError(f"bad generator name {g!r}")

    @classmethod
    def standard(cls, name: str, rank: int, prefix: str = "a") -> "Alphabet":
        return cls(name, tuple(f"{prefix}{i + 1}" for i in range(rank)))

    @property
    def rank(self) -> int:
        return len(self.names)

    def __contains__(self, token: str) -> bool:
        return _split_token(token)[0] in self._lookup

    @property
    def _lookup(self) -> dict[str, int]:
        table = self.__dict__.get("_table")
        if table is None:
            table = {g: i for i, g in enumerate(self.names)}
            object.__setattr__(self, "_table", table)
        return table

    def letter(self, token: str) -> int:
        base, sign = _split_token(token)
        try:
            return sign * (self._lookup[base] + 1)
        except KeyError:
            raise AlphabetMismatch(f"{base!r} is not a generator of {self.name}") from None

    def format_letter(self, letter: int) -> str:
        g = self.names[abs(letter) - 1]
        return g if letter > 0 else g + "^-1"

    def generators(self) -> list["ReducedWord"]:
        return [ReducedWord(self, (i + 1,)) for i in range(self.rank)]

    def identity(self) -> "ReducedWord":
        return ReducedWord(self, ())

    def word(self, text: str) -> "ReducedWord":
        """Parse and reduce a word written in the text syntax."""
        letters = [self.letter(tok) for tok in text.split() if tok != "1"]
        return ReducedWord(self, free_reduce(letters))


def _split_token(token: str) -> tuple[str, int]:
    if token.endswith("^-1"):
        return token[:-3], -1
    return token, 1


# Fixture alphabets: F_11 = <s1..s8, x, 0x, 1x> and F_3 = <y, 0y, 1y>.
X_ALPHABET = Alphabet("X", tuple(f"s{i}" for i in range(1, 9)) + ("x", "0x", "1x"))
Y_ALPHABET = Alphabet("Y", ("y", "0y", "1y"))


def free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    """Single left-to-right stack pass; the result is the canonical form."""
    stack: list[int] = []
    for a in letters:
        if stack and stack[-1] == -a:
            stack.pop()
        else:
            stack.append(a)
    return tuple(stack)


def mul_letters(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    # both inputs reduced, so cancellation only happens at the seam
    i, la, lb = 0, len(a), len(b)
    while i < la and i < lb and a[la - 1 - i] == -b[i]:
        i += 1
    if i == 0:
        return a + b
    return a[: la - i] + b[i:]


def inv_letters(a: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-x for x in reversed(a))


@dataclass(frozen=True)
class Generator:
    alphabet: Alphabet
    index: int
    sign: int = 1

    def __post_init__(self):
        if not 0 <= self.index < self.alphabet.rank:
            raise ValueError(f"generator index {self.index} out of range for rank {self.alphabet.rank}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def letter(self) -> int:
        return self.sign * (self.index + 1)

    def __invert__(self) -> "Generator":
        return Generator(self.alphabet, self.index, -self.sign)

    def __str__(self):
        return self.alphabet.format_letter(self.letter)


@dataclass(frozen=True)
class ReducedWord:
    alphabet: Alphabet
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        r = self.alphabet.rank
        prev = 0
        for a in self.letters:
            if not (1 <= abs(a) <= r):
                raise ValueError(f"letter {a} out of range for {self.alphabet.name}")
            if a == -prev:
                raise ValueError("letters are not freely reduced")
            prev = a

    def __len__(self):
        return len(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return multiply(self, other)

    def __invert__(self) -> "ReducedWord":
        return invert(self)

    @property
    def generators(self) -> tuple[Generator, ...]:
        return tuple(Generator(self.alphabet, abs(a) - 1, 1 if a > 0 else -1) for a in self.letters)

    def __str__(self):
        return " ".join(self.alphabet.format_letter(a) for a in self.letters)


def reduce(letters: Sequence[Generator], alphabet: Alphabet | None = None) -> ReducedWord:
    """Freely reduce a sequence of generators from a single alphabet.

    ``alphabet`` is only needed for the empty sequence; otherwise it is taken
    from the letters, which must all agree.
    """
    if alphabet is None:
        if not letters:
            raise ValueError("alphabet required to reduce an empty sequence")
        alphabet = letters[0].alphabet
    for g in letters:
        if g.alphabet != alphabet:
            raise AlphabetMismatch(f"letter {g} is not in alphabet {alphabet.name}")
    return ReducedWord(alphabet, free_reduce(g.letter for g in letters))


def multiply(a: ReducedWord, b: ReducedWord) -> ReducedWord:
    if a.alphabet != b.alphabet:
        raise AlphabetMismatch(f"cannot multiply words over {a.alphabet.name} and {b.alphabet.name}")
    return ReducedWord(a.alphabet, mul_letters(a.letters, b.letters))


def invert(w: ReducedWord) -> ReducedWord:
    return ReducedWord(w.alphabet, inv_letters(w.letters))


@dataclass(frozen=True)
class PairElement:
    """Element of X x Y; the two factors commute."""

    x: ReducedWord
    y: ReducedWord

    @classmethod
    def identity(cls, X: Alphabet = X_ALPHABET, Y: Alphabet = Y_ALPHABET) -> "PairElement":
        return cls(ReducedWord(X), ReducedWord(Y))

    @classmethod
    def parse(cls, text: str, X: Alphabet = X_ALPHABET, Y: Alphabet = Y_ALPHABET) -> "PairElement":
        """Split tokens between the factors by name; order within each factor is kept."""
        xs, ys = [], []
        for tok in text.split():
            if tok == "1":
                continue
            in_x, in_y = tok in X, tok in Y
            if in_x and in_y:
                raise AlphabetMismatch(f"token {tok!r} is ambiguous between {X.name} and {Y.name}")
            if in_x:
                xs.append(X.letter(tok))
            elif in_y:
                ys.append(Y.letter(tok))
            else:
                raise AlphabetMismatch(f"unknown generator {tok!r}")
        return cls(ReducedWord(X, free_reduce(xs)), ReducedWord(Y, free_reduce(ys)))

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.x.letters, self.y.letters

    def is_identity(self) -> bool:
        return not self.x.letters and not self.y.letters

    def __len__(self):
        return len(self.x) + len(self.y)

    def __mul__(self, other: "PairElement") -> "PairElement":
        return pair_mul(self, other)

    def __invert__(self) -> "PairElement":
        return PairElement(invert(self.x), invert(self.y))

    def __str__(self):
        s = " ".join(p for p in (str(self.x), str(self.y)) if p)
        return s or "1"


def pair_mul(a: PairElement, b: PairElement) -> PairElement:
    return PairElement(multiply(a.x, b.x), multiply(a.y, b.y))
