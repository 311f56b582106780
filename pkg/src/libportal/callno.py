"""Library of Congress call number parsing, ordering, and range matching.

Grammar (simplified shelf-order-correct subset):

    CALLNO  = CLASS [NUMBER] [CUTTER]* [YEAR]
    CLASS   = 1-3 letters
    NUMBER  = digits, optionally followed by "." and more digits
    CUTTER  = optional ".", one letter, one or more digits
    YEAR    = exactly four digits, separated from what precedes it

Input is case-insensitive; the canonical form is uppercase. Cutter digits
order as decimal fractions (".M67" shelves before ".M7"). The total order
compares class letters left to right with shorter-prefix-first, then the
class number numerically, then cutters token-wise, then the year; a missing
component sorts before any present one.

`sort_key` produces a byte string whose bytewise order equals `compare`,
so call numbers can be ordered or indexed without re-parsing.

Ranges ("B - BD") bound class letters only. The upper bound is inclusive
and prefix-inclusive: "B - BD" admits B, BC, BD, and any BD-prefixed class.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal

LESS = -1
EQUAL = 0
GREATER = 1

_CLASS_RE = re.compile(r"[A-Z]{1,3}")
_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?")
_CUTTER_RE = re.compile(r"\.?\s*([A-Z])(\d+)")
_YEAR_RE = re.compile(r"(\d{4})(?!\d)")
_RANGE_BOUND_RE = re.compile(r"^[A-Z]{1,3}$")


class CallNumberError(ValueError):
    """Raised for unparseable call number or range text."""

    def __init__(self, reason: str, offset: int, text: str = ""):
        self.reason = reason
        self.offset = offset
        self.text = text
        super().__init__(f"{reason} at offset {offset}" + (f" in {text!r}" if text else ""))


@dataclass(frozen=True)
class CallNumber:
    """Parsed call number. `raw` keeps the original text and is not compared."""

    class_letters: str
    class_number: Decimal | None
    cutters: tuple[tuple[str, str], ...]
    year: int | None
    raw: str = field(compare=False, default="")


@dataclass(frozen=True)
class CallNumberRange:
    """Inclusive class-letter range; `lo` and `hi` are 1-3 uppercase letters."""

    lo: str
    hi: str


def parse_call_number(text: str) -> CallNumber:
    """Parse `text` into a CallNumber, preserving the original in `raw`."""
    upper = text.upper()
    pos = _skip_ws(upper, 0)
    if pos >= len(upper):
        raise CallNumberError("empty call number", 0, text)

    m = _CLASS_RE.match(upper, pos)
    if not m:
        raise CallNumberError("expected class letters", pos, text)
    class_letters = m.group(0)
    pos = m.end()
    if pos < len(upper) and upper[pos].isalpha():
        raise CallNumberError("class letters run past three", pos, text)

    class_number: Decimal | None = None
    probe = _skip_ws(upper, pos)
    m = _NUMBER_RE.match(upper, probe)
    if m:
        class_number = Decimal(m.group(0))
        pos = m.end()

    cutters: list[tuple[str, str]] = []
    while True:
        probe = _skip_ws(upper, pos)
        m = _CUTTER_RE.match(upper, probe)
        if not m:
            break
        cutters.append((m.group(1), m.group(2)))
        pos = m.end()

    year: int | None = None
    probe = _skip_ws(upper, pos)
    if probe < len(upper):
        m = _YEAR_RE.match(upper, probe)
        if m:
            year = int(m.group(1))
            pos = m.end()

    pos = _skip_ws(upper, pos)
    if pos < len(upper):
        raise CallNumberError("unrecognized text", pos, text)

    return CallNumber(
        class_letters=class_letters,
        class_number=class_number,
        cutters=tuple(cutters),
        year=year,
        raw=text,
    )


def format_call_number(c: CallNumber) -> str:
    """Canonical uppercase rendering; reparsing it yields an equal CallNumber."""
    out = c.class_letters
    if c.class_number is not None:
        out += _format_number(c.class_number)
    for letter, digits in c.cutters:
        out += f" .{letter}{digits}"
    if c.year is not None:
        out += f" {c.year}"
    return out


def compare(a: CallNumber, b: CallNumber) -> int:
    """Total order over call numbers; returns LESS, EQUAL, or GREATER."""
    if a.class_letters != b.class_letters:
        return LESS if a.class_letters < b.class_letters else GREATER

    r = _compare_optional(a.class_number, b.class_number)
    if r != EQUAL:
        return r

    for (la, da), (lb, db) in zip(a.cutters, b.cutters):
        if la != lb:
            return LESS if la < lb else GREATER
        fa, fb = _cutter_fraction(da), _cutter_fraction(db)
        if fa != fb:
            return LESS if fa < fb else GREATER
    if len(a.cutters) != len(b.cutters):
        return LESS if len(a.cutters) < len(b.cutters) else GREATER

    return _compare_optional(a.year, b.year)


def sort_key(c: CallNumber) -> bytes:
    """Byte string whose bytewise order equals compare().

    Layout: class letters, NUL, number (int-digit count byte + int digits +
    fraction digits without trailing zeros), NUL, cutters (letter + stripped
    digits + 0x01 each), NUL, optional 4-digit year. Missing components
    encode as empty sections, which sort before any populated section.
    """
    parts = [c.class_letters.encode("ascii"), b"\x00"]
    if c.class_number is not None:
        intpart, frac = _number_parts(c.class_number)
        parts.append(bytes([len(intpart)]) + intpart.encode("ascii") + frac.encode("ascii"))
    parts.append(b"\x00")
    for letter, digits in c.cutters:
        parts.append(letter.encode("ascii") + digits.rstrip("0").encode("ascii") + b"\x01")
    parts.append(b"\x00")
    if c.year is not None:
        parts.append(f"{c.year:04d}".encode("ascii"))
    return b"".join(parts)


def parse_range_list(text: str) -> list[CallNumberRange]:
    """Parse comma-separated `lo - hi` pairs; a bare `x` means `x - x`."""
    if not text or not text.strip():
        raise CallNumberError("empty range list", 0, text)
    ranges: list[CallNumberRange] = []
    offset = 0
    for part in text.split(","):
        stripped = part.strip()
        if not stripped:
            raise CallNumberError("empty range", offset, text)
        if "-" in stripped:
            lo_text, hi_text = stripped.split("-", 1)
        else:
            lo_text = hi_text = stripped
        lo = _parse_bound(lo_text, offset, text)
        hi = _parse_bound(hi_text, offset, text)
        if lo > hi:
            raise CallNumberError(f"inverted range {lo} - {hi}", offset, text)
        ranges.append(CallNumberRange(lo, hi))
        offset += len(part) + 1
    return ranges


def format_range_list(ranges: list[CallNumberRange]) -> str:
    return ", ".join(f"{r.lo} - {r.hi}" for r in ranges)


def in_range(c: CallNumber, r: CallNumberRange) -> bool:
    """Both bounds inclusive; the upper bound also admits prefixed classes."""
    letters = c.class_letters
    return letters >= r.lo and (letters <= r.hi or letters.startswith(r.hi))


def _skip_ws(s: str, pos: int) -> int:
    while pos < len(s) and s[pos].isspace():
        pos += 1
    return pos


def _parse_bound(text: str, offset: int, full: str) -> str:
    bound = text.strip().upper()
    if not _RANGE_BOUND_RE.match(bound):
        raise CallNumberError(f"bad range bound {text.strip()!r}", offset, full)
    return bound


def _compare_optional(a, b) -> int:
    if a is None and b is None:
        return EQUAL
    if a is None:
        return LESS
    if b is None:
        return GREATER
    if a == b:
        return EQUAL
    return LESS if a < b else GREATER


def _cutter_fraction(digits: str) -> Decimal:
    return Decimal("0." + digits)


def _number_parts(d: Decimal) -> tuple[str, str]:
    s = format(d, "f")
    if "." in s:
        intpart, frac = s.split(".", 1)
        frac = frac.rstrip("0")
    else:
        intpart, frac = s, ""
    return intpart.lstrip("0") or "0", frac


def _format_number(d: Decimal) -> str:
    intpart, frac = _number_parts(d)
    return intpart + ("." + frac if frac else "")
