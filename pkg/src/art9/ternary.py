"""Balanced-ternary trits and 9-trit words.

A word is stored least significant trit first (index 0 is the LST) but is
always printed most significant trit first, using ``-``, ``0`` and ``+``.
Every operation here is pure; words are immutable and interned, so two
words with the same value are the same object.
"""
from __future__ import annotations

from enum import Enum, IntEnum

WIDTH = 9
MODULUS = 3 ** WIDTH            # 19683
MAX_VALUE = (MODULUS - 1) // 2  # 9841
MIN_VALUE = -MAX_VALUE


class Trit(IntEnum):
    NEG = -1
    ZERO = 0
    POS = 1

    @property
    def char(self) -> str:
        return _CHARS[self]

    @classmethod
    def from_char(cls, c: str) -> "Trit":
        try:
            return _FROM_CHAR[c]
        except KeyError:
            raise ValueError(f"not a trit character: {c!r}") from None


_CHARS = {Trit.NEG: "-", Trit.ZERO: "0", Trit.POS: "+"}
_FROM_CHAR = {"-": Trit.NEG, "0": Trit.ZERO, "+": Trit.POS}
_TRIT = {-1: Trit.NEG, 0: Trit.ZERO, 1: Trit.POS}


class InvertKind(Enum):
    STI = "STI"
    NTI = "NTI"
    PTI = "PTI"


class LogicKind(Enum):
    AND = "AND"
    OR = "OR"
    XOR = "XOR"


# Per-trit truth tables.
def sti(t: int) -> Trit:
    return _TRIT[-t]


def nti(t: int) -> Trit:
    return Trit.POS if t == -1 else Trit.NEG


def pti(t: int) -> Trit:
    return Trit.NEG if t == 1 else Trit.POS


def trit_and(a: int, b: int) -> Trit:
    return _TRIT[min(a, b)]


def trit_or(a: int, b: int) -> Trit:
    return _TRIT[max(a, b)]


def trit_xor(a: int, b: int) -> Trit:
    # (a + b) mod 3 mapped onto the balanced digit set
    return _TRIT[(a + b + 4) % 3 - 1]


INVERTERS = {InvertKind.STI: sti, InvertKind.NTI: nti, InvertKind.PTI: pti}
GATES = {LogicKind.AND: trit_and, LogicKind.OR: trit_or, LogicKind.XOR: trit_xor}


def trits_value(trits) -> int:
    """Balanced value of a trit sequence given LST first."""
    v = 0
    for t in reversed(trits):
        v = v * 3 + t
    return v


def int_to_trits(v: int, width: int) -> tuple[Trit, ...]:
    """Balanced digits of ``v`` (LST first), reduced mod ``3**width``."""
    m = 3 ** width
    v = (v + (m - 1) // 2) % m - (m - 1) // 2
    out = []
    for _ in range(width):
        r = v % 3
        if r == 2:
            r = -1
        out.append(_TRIT[r])
        v = (v - r) // 3
    return tuple(out)


def format_trits(trits) -> str:
    """Render LST-first trits most significant first."""
    return "".join(_CHARS[_TRIT[t]] for t in reversed(trits))


def parse_trits(text: str) -> tuple[Trit, ...]:
    """Parse an MS-first trit string into LST-first trits."""
    return tuple(Trit.from_char(c) for c in reversed(text))


def wrap(v: int) -> int:
    """Reduce an integer into the balanced range of a word."""
    return (v + MAX_VALUE) % MODULUS - MAX_VALUE


class Word9:
    """A 9-trit balanced-ternary word.

    Construct with ``Word9(trits)`` (LST first), :func:`encode_balanced`, or
    :meth:`Word9.parse` for ``"0000++-0+"`` style literals.
    """

    __slots__ = ("trits", "value")

    def __new__(cls, trits):
        trits = tuple(trits)
        if len(trits) != WIDTH:
            raise ValueError(f"a word has {WIDTH} trits, got {len(trits)}")
        for t in trits:
            if t not in _TRIT:
                raise ValueError(f"not a balanced trit: {t!r}")
        return encode_balanced(trits_value(trits))

    @classmethod
    def _make(cls, value: int) -> "Word9":
        w = object.__new__(cls)
        object.__setattr__(w, "trits", int_to_trits(value, WIDTH))
        object.__setattr__(w, "value", value)
        return w

    @classmethod
    def parse(cls, text: str) -> "Word9":
        text = text.strip()
        if text.startswith("0t"):
            text = text[2:]
        if len(text) != WIDTH:
            raise ValueError(f"word literal must have {WIDTH} trits: {text!r}")
        return cls(parse_trits(text))

    def __setattr__(self, name, value):
        raise AttributeError("Word9 is immutable")

    def __reduce__(self):
        return (encode_balanced, (self.value,))

    def __getitem__(self, i: int) -> Trit:
        return self.trits[i]

    def __len__(self) -> int:
        return WIDTH

    def __iter__(self):
        return iter(self.trits)

    def __eq__(self, other):
        if isinstance(other, Word9):
            return self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash(("Word9", self.value))

    def __str__(self):
        return format_trits(self.trits)

    def __repr__(self):
        return f"Word9('{self}'={self.value})"

    @property
    def unsigned(self) -> int:
        return self.value + MAX_VALUE

    def field(self, hi: int, lo: int) -> int:
        """Balanced value of the slice ``[hi:lo]``."""
        return trits_value(self.trits[lo:hi + 1])


_WORDS: list[Word9] = [Word9._make(v) for v in range(MIN_VALUE, MAX_VALUE + 1)]
ZERO = _WORDS[MAX_VALUE]
ONE = _WORDS[MAX_VALUE + 1]


def encode_balanced(v: int) -> Word9:
    """Word whose balanced value is ``v`` mod 3**9 (wraps, never raises)."""
    return _WORDS[(v + MAX_VALUE) % MODULUS]


def from_unsigned(u: int) -> Word9:
    return _WORDS[u % MODULUS]


def balanced_value(w: Word9) -> int:
    return w.value


def unsigned_value(w: Word9) -> int:
    return w.value + MAX_VALUE


def invert_word(kind: InvertKind, w: Word9) -> Word9:
    f = INVERTERS[kind]
    return Word9(f(t) for t in w.trits)


def logic_word(kind: LogicKind, a: Word9, b: Word9) -> Word9:
    f = GATES[kind]
    return Word9(f(x, y) for x, y in zip(a.trits, b.trits))


def add_word(a: Word9, b: Word9) -> Word9:
    return encode_balanced(a.value + b.value)


def negate_word(w: Word9) -> Word9:
    return _WORDS[MAX_VALUE - w.value]


def sub_word(a: Word9, b: Word9) -> Word9:
    return add_word(a, negate_word(b))


def shift_word(w: Word9, amount: int, direction: str) -> Word9:
    """Shift by ``amount`` trits; a negative amount reverses ``direction``.

    Left shifts multiply by 3**amount mod 3**9. Right shifts drop low trits
    and zero-fill, which in balanced ternary rounds to the nearest integer.
    """
    if not -4 <= amount <= 4:
        raise ValueError(f"shift amount {amount} outside [-4, 4]")
    if direction not in ("left", "right"):
        raise ValueError(f"bad shift direction {direction!r}")
    if amount < 0:
        amount = -amount
        direction = "right" if direction == "left" else "left"
    if amount == 0:
        return w
    t = w.trits
    if direction == "left":
        shifted = (0,) * amount + t[:WIDTH - amount]
    else:
        shifted = t[amount:] + (0,) * amount
    return encode_balanced(trits_value(shifted))


def compare_word(a: Word9, b: Word9) -> Trit:
    d = a.value - b.value
    return _TRIT[(d > 0) - (d < 0)]
