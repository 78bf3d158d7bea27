"""The free group on countably many generators, coded by natural numbers.

A reduced word is a tuple of ``(generator, exponent)`` letters where
adjacent generators differ and no exponent is zero.  ``encode_word`` and
``decode_word`` are mutually inverse bijections between reduced words and
the naturals, with the empty word coded by ``1``.  ``star`` and ``inv``
turn the naturals into a computable copy of the free group.
"""

from __future__ import annotations

import re
from functools import lru_cache
from math import isqrt

Word = tuple[tuple[int, int], ...]

IDENTITY = 1


def pair(x: int, y: int) -> int:
    """Bijection N x N -> N, ``2**x * (2y+1) - 1``."""
    return ((2 * y + 1) << x) - 1


def unpair(n: int) -> tuple[int, int]:
    m = n + 1
    x = (m & -m).bit_length() - 1
    return x, ((m >> x) - 1) // 2


def _zig(e: int) -> int:
    return 2 * (e - 1) if e > 0 else -2 * e - 1


def _unzig(z: int) -> int:
    return z // 2 + 1 if z % 2 == 0 else -(z + 1) // 2


def cantor(x: int, y: int) -> int:
    s = x + y
    return s * (s + 1) // 2 + y


def uncantor(n: int) -> tuple[int, int]:
    s = (isqrt(8 * n + 1) - 1) // 2
    y = n - s * (s + 1) // 2
    return s - y, y


def _bij_digits(n: int, base: int) -> list[int]:
    """Bijective base-``base`` digits (1..base), least significant first."""
    out = []
    while n:
        n, r = divmod(n - 1, base)
        out.append(r + 1)
    return out


def _bij_value(digits: list[int], base: int) -> int:
    n = 0
    for d in reversed(digits):
        n = n * base + d
    return n


def _seq_code(items: list[int]) -> int:
    """Sequences of naturals <-> N; each item costs O(log item) bits.

    Items are written in bijective binary (digits 1, 2) and separated by
    the digit 3; the string is read in bijective base 3.  Empty -> 0.
    """
    if not items:
        return 0
    digits: list[int] = []
    for k, a in enumerate(items):
        if k:
            digits.append(3)
        digits.extend(reversed(_bij_digits(a, 2)))
    return 1 + _bij_value(list(reversed(digits)), 3)


def _seq_decode(n: int) -> list[int]:
    if n == 0:
        return []
    digits = list(reversed(_bij_digits(n - 1, 3)))
    items, cur = [], []
    for d in digits:
        if d == 3:
            items.append(_bij_value(list(reversed(cur)), 2))
            cur = []
        else:
            cur.append(d)
    items.append(_bij_value(list(reversed(cur)), 2))
    return items


def _swap(n: int) -> int:
    # empty word must be code 1
    return {0: 1, 1: 0}.get(n, n)


def is_reduced(w: Word) -> bool:
    for k, (g, e) in enumerate(w):
        if g < 0 or e == 0:
            return False
        if k and w[k - 1][0] == g:
            return False
    return True


def encode_word(w: Word) -> int:
    w = tuple((int(g), int(e)) for g, e in w)
    if not is_reduced(w):
        raise ValueError(f"word is not reduced: {w!r}")
    items = []
    prev = None
    for g, e in w:
        gi = g if prev is None or g < prev else g - 1
        items.append(cantor(gi, _zig(e)))
        prev = g
    return _swap(_seq_code(items))


@lru_cache(maxsize=1 << 16)
def decode_word(code: int) -> Word:
    if code < 0:
        raise ValueError("codes are natural numbers")
    letters = []
    prev = None
    for item in _seq_decode(_swap(code)):
        gi, z = uncantor(item)
        g = gi if prev is None or gi < prev else gi + 1
        letters.append((g, _unzig(z)))
        prev = g
    return tuple(letters)


def reduce_word(letters) -> Word:
    """Freely reduce an arbitrary letter sequence (zero exponents allowed)."""
    stack: list[list[int]] = []
    for g, e in letters:
        if e == 0:
            continue
        if stack and stack[-1][0] == g:
            stack[-1][1] += e
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([g, e])
    return tuple((g, e) for g, e in stack)


def word_inverse(w: Word) -> Word:
    return tuple((g, -e) for g, e in reversed(w))


@lru_cache(maxsize=1 << 18)
def star(a: int, b: int) -> int:
    return encode_word(reduce_word(decode_word(a) + decode_word(b)))


def inv(a: int) -> int:
    return encode_word(word_inverse(decode_word(a)))


def star_all(*codes: int) -> int:
    out = IDENTITY
    for c in codes:
        out = star(out, c)
    return out


_LETTER = re.compile(r"g(\d+)(?:\^(-?\d+))?$")


def parse_word(text: str) -> Word:
    """Parse ``g0^2*g1^-1``; ``1``, ``e`` or the empty string is the identity."""
    text = text.strip()
    if text in ("", "1", "e"):
        return ()
    letters = []
    for part in text.split("*"):
        m = _LETTER.match(part.strip())
        if not m:
            raise ValueError(f"bad letter {part!r} in word {text!r}")
        letters.append((int(m.group(1)), int(m.group(2) or 1)))
    return reduce_word(letters)


def format_word(w: Word) -> str:
    if not w:
        return "1"
    return "*".join(f"g{g}" if e == 1 else f"g{g}^{e}" for g, e in w)


def code_of(text: str) -> int:
    return encode_word(parse_word(text))
