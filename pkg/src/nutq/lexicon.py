"""Arabic phoneme inventory, grapheme-to-phoneme rules, pronunciation dictionary.

The engine recognizes 44 phonemes (including SIL, the silence pseudo-phoneme).
Fully diacritized Arabic words are transduced to phoneme sequences by a
left-to-right rule walk: consonant letters map through a fixed table, short
vowels come from the diacritics (with emphatic/Tafkhim coloring decided by the
immediately preceding consonant), madd letters lengthen the preceding short
vowel, shadda doubles its consonant, and tanwin expands to vowel + N.

The pronunciation dictionary is a UTF-8 text format, one entry per line:
``WORD PH1 PH2 ...`` for a word's first variant and ``WORD(n) PH1 PH2 ...``
for additional variants (n >= 2).  Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    DuplicateVariant,
    EmptyInput,
    EmptyLexicon,
    UnknownCharacter,
    UnknownPhonemeSymbol,
    UnvocalizedConsonant,
)

# -- inventory ---------------------------------------------------------------------

SILENCE = "Silence"
SHORT_VOWEL = "ShortVowel"
LONG_VOWEL = "LongVowel"
EMPHATIC = "Emphatic"
FRICATIVE = "Fricative"
OCCLUSIVE = "Occlusive"
NASAL = "Nasal"
LIQUID = "Liquid"
SEMIVOWEL = "Semivowel"

CATEGORIES = frozenset({
    SILENCE, SHORT_VOWEL, LONG_VOWEL, EMPHATIC, FRICATIVE,
    OCCLUSIVE, NASAL, LIQUID, SEMIVOWEL,
})


@dataclass(frozen=True)
class Phoneme:
    symbol: str
    category: str
    note: str = ""

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")


@dataclass(frozen=True)
class PhonemeInventory:
    phonemes: tuple[Phoneme, ...]

    def __post_init__(self):
        symbols = [p.symbol for p in self.phonemes]
        if len(symbols) != len(set(symbols)):
            raise ValueError("duplicate phoneme symbols")
        silences = [p for p in self.phonemes if p.category == SILENCE]
        if len(silences) != 1 or silences[0].symbol != "SIL":
            raise ValueError("inventory needs exactly one silence phoneme, SIL")

    def __len__(self) -> int:
        return len(self.phonemes)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.symbol_set

    def __iter__(self):
        return iter(self.phonemes)

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(p.symbol for p in self.phonemes)

    @property
    def symbol_set(self) -> frozenset:
        return frozenset(p.symbol for p in self.phonemes)

    def category_of(self, symbol: str) -> str:
        for p in self.phonemes:
            if p.symbol == symbol:
                return p.category
        raise KeyError(symbol)


def _build_inventory() -> PhonemeInventory:
    rows = [
        ("SIL", SILENCE, "inter/intra-word silence"),
        ("AE", SHORT_VOWEL, "fatha"),
        ("AA", SHORT_VOWEL, "fatha after R/Q"),
        ("AH", SHORT_VOWEL, "fatha after an emphatic"),
        ("UH", SHORT_VOWEL, "damma"),
        ("UX", SHORT_VOWEL, "damma after a Tafkhim trigger"),
        ("IH", SHORT_VOWEL, "kasra"),
        ("IX", SHORT_VOWEL, "kasra after a Tafkhim trigger"),
        ("AE:", LONG_VOWEL, "fatha + alef"),
        ("AA:", LONG_VOWEL, "fatha + alef after R/Q"),
        ("AH:", LONG_VOWEL, "fatha + alef after an emphatic"),
        ("UW", LONG_VOWEL, "damma + waw"),
        ("IY", LONG_VOWEL, "kasra + ya"),
        ("IX:", LONG_VOWEL, "kasra + ya after a Tafkhim trigger"),
        ("DH2", EMPHATIC, "ظ"),
        ("TT", EMPHATIC, "ط"),
        ("DD", EMPHATIC, "ض"),
        ("SS", EMPHATIC, "ص"),
        ("F", FRICATIVE, "ف"),
        ("TH", FRICATIVE, "ث"),
        ("DH", FRICATIVE, "ذ"),
        ("S", FRICATIVE, "س"),
        ("Z", FRICATIVE, "ز"),
        ("SH", FRICATIVE, "ش"),
        ("KH", FRICATIVE, "خ"),
        ("GH", FRICATIVE, "غ"),
        ("AI", FRICATIVE, "ع"),
        ("HH", FRICATIVE, "ح"),
        ("H", FRICATIVE, "ه"),
        ("B", OCCLUSIVE, "ب"),
        ("T", OCCLUSIVE, "ت and ة"),
        ("D", OCCLUSIVE, "د"),
        ("JH", OCCLUSIVE, "ج"),
        ("K", OCCLUSIVE, "ك"),
        ("Q", OCCLUSIVE, "ق"),
        ("E", OCCLUSIVE, "glottal stop: ء أ إ"),
        ("M", NASAL, "م"),
        ("N", NASAL, "ن"),
        ("R", LIQUID, "ر"),
        ("L", LIQUID, "ل"),
        ("W", SEMIVOWEL, "و"),
        ("Y", SEMIVOWEL, "ي"),
        ("AW", SEMIVOWEL, "hamza on waw: ؤ"),
        ("AY", SEMIVOWEL, "hamza on ya: ئ"),
    ]
    return PhonemeInventory(tuple(Phoneme(*row) for row in rows))


INVENTORY = _build_inventory()

# -- orthography --------------------------------------------------------------------

FATHA = "َ"
DAMMA = "ُ"
KASRA = "ِ"
SUKUN = "ْ"
SHADDA = "ّ"
FATHATAN = "ً"
DAMMATAN = "ٌ"
KASRATAN = "ٍ"

DIACRITICS = frozenset({FATHA, DAMMA, KASRA, SUKUN, SHADDA, FATHATAN, DAMMATAN, KASRATAN})
VOCALIZATIONS = frozenset({FATHA, DAMMA, KASRA, SUKUN, FATHATAN, DAMMATAN, KASRATAN})

ALEF = "ا"
ALEF_MAKSURA = "ى"
ALEF_MADDA = "آ"
WAW = "و"
YA = "ي"

# letter -> consonant phoneme (madd-capable letters also appear here because
# they double as consonants when carrying their own vocalization)
CONSONANT_OF = {
    "ء": "E",    # hamza on the line
    "أ": "E",    # hamza above alef
    "إ": "E",    # hamza below alef
    "ؤ": "AW",   # hamza on waw
    "ئ": "AY",   # hamza on ya
    "ب": "B",
    "ة": "T",    # ta marbuta
    "ت": "T",
    "ث": "TH",
    "ج": "JH",
    "ح": "HH",
    "خ": "KH",
    "د": "D",
    "ذ": "DH",
    "ر": "R",
    "ز": "Z",
    "س": "S",
    "ش": "SH",
    "ص": "SS",
    "ض": "DD",
    "ط": "TT",
    "ظ": "DH2",
    "ع": "AI",
    "غ": "GH",
    "ف": "F",
    "ق": "Q",
    "ك": "K",
    "ل": "L",
    "م": "M",
    "ن": "N",
    "ه": "H",
    WAW: "W",
    YA: "Y",
}

# Tafkhim triggers color the immediately following short vowel; R and Q select
# the back AA series, the remaining triggers the AH series.
TAFKHIM_TRIGGERS = frozenset({"TT", "DD", "SS", "DH2", "Q", "R", "KH", "GH"})
BACK_TRIGGERS = frozenset({"Q", "R"})

LONG_OF = {"AE": "AE:", "AA": "AA:", "AH": "AH:", "UH": "UW", "UX": "UW",
           "IH": "IY", "IX": "IX:"}
FATHA_VOWELS = frozenset({"AE", "AA", "AH"})
DAMMA_VOWELS = frozenset({"UH", "UX"})
KASRA_VOWELS = frozenset({"IH", "IX"})


@dataclass(frozen=True)
class _Unit:
    """One base letter plus the diacritics attached to it."""

    letter: str
    marks: tuple[str, ...]
    start: int
    end: int  # exclusive


def _segment(word: str) -> list[_Unit]:
    units: list[_Unit] = []
    letter = None
    marks: list[str] = []
    start = 0
    for i, ch in enumerate(word):
        if ch in DIACRITICS:
            if letter is None:
                raise UnknownCharacter(f"diacritic {ch!r} at position {i} has no base letter")
            marks.append(ch)
        elif ch in CONSONANT_OF or ch in (ALEF, ALEF_MAKSURA, ALEF_MADDA):
            if letter is not None:
                units.append(_Unit(letter, tuple(marks), start, i))
            letter, marks, start = ch, [], i
        else:
            raise UnknownCharacter(f"character {ch!r} at position {i} is not Arabic letter or diacritic")
    if letter is not None:
        units.append(_Unit(letter, tuple(marks), start, len(word)))
    return units


def _short_vowel(mark: str, consonant: str | None) -> str:
    colored = consonant in TAFKHIM_TRIGGERS
    if mark in (FATHA, FATHATAN):
        if colored:
            return "AA" if consonant in BACK_TRIGGERS else "AH"
        return "AE"
    if mark in (DAMMA, DAMMATAN):
        return "UX" if colored else "UH"
    return "IX" if colored else "IH"


def phonetize_with_spans(word: str) -> list[tuple[str, int, int]]:
    """Transduce one fully diacritized Arabic word to (phoneme, start, end) triples.

    Spans are character offsets into the input (end exclusive) at letter-unit
    granularity: every phoneme produced by a letter and its marks covers that
    unit, and a lengthened vowel covers both its diacritic's unit and the madd
    letter.  The span list drives grapheme highlighting in the feedback UI.
    """
    word = word.strip()
    if not word:
        raise EmptyInput("empty word")
    units = _segment(word)
    out: list[tuple[str, int, int]] = []
    prev_fathatan = False

    for unit in units:
        letter, marks = unit.letter, unit.marks
        seat_for_tanwin = prev_fathatan
        prev_fathatan = False

        if letter == ALEF_MADDA:
            if marks:
                raise UnknownCharacter(f"unexpected diacritics on {letter!r} at position {unit.start}")
            out.append(("E", unit.start, unit.end))
            out.append(("AE:", unit.start, unit.end))
            continue

        if letter in (ALEF, ALEF_MAKSURA):
            last = out[-1][0] if out else None
            if FATHATAN in marks:
                # tanwin written on the seat itself: the short vowel must
                # already be present, the seat stays silent, N is appended
                if last not in FATHA_VOWELS:
                    raise UnvocalizedConsonant(
                        f"tanwin seat {letter!r} at position {unit.start} lacks a preceding fatha")
                out.append(("N", unit.start, unit.end))
            elif marks:
                raise UnknownCharacter(f"unexpected diacritics on {letter!r} at position {unit.start}")
            elif seat_for_tanwin:
                pass  # silent seat of a preceding fathatan
            elif last in FATHA_VOWELS:
                sym, start, _ = out[-1]
                out[-1] = (LONG_OF[sym], start, unit.end)
            elif letter == ALEF and last == "UW":
                pass  # otiose alef after a long damma (plural-waw spelling)
            else:
                raise UnvocalizedConsonant(
                    f"bare {letter!r} at position {unit.start} lengthens nothing")
            continue

        consonant = CONSONANT_OF[letter]

        if not marks:
            last = out[-1][0] if out else None
            if letter == WAW and last in DAMMA_VOWELS:
                sym, start, _ = out[-1]
                out[-1] = (LONG_OF[sym], start, unit.end)
                continue
            if letter == YA and last in KASRA_VOWELS:
                sym, start, _ = out[-1]
                out[-1] = (LONG_OF[sym], start, unit.end)
                continue
            raise UnvocalizedConsonant(
                f"letter {letter!r} at position {unit.start} carries no diacritic")

        vowel_marks = [m for m in marks if m in VOCALIZATIONS]
        if len(vowel_marks) > 1:
            raise UnknownCharacter(
                f"conflicting diacritics {vowel_marks!r} at position {unit.start}")
        bad = [m for m in marks if m not in VOCALIZATIONS and m != SHADDA]
        if bad or marks.count(SHADDA) > 1:
            raise UnknownCharacter(f"malformed diacritics at position {unit.start}")

        out.append((consonant, unit.start, unit.end))
        if SHADDA in marks:
            out.append((consonant, unit.start, unit.end))

        if not vowel_marks:
            raise UnvocalizedConsonant(
                f"letter {letter!r} at position {unit.start} carries shadda but no vowel or sukun")
        mark = vowel_marks[0]
        if mark == SUKUN:
            continue
        out.append((_short_vowel(mark, consonant), unit.start, unit.end))
        if mark in (FATHATAN, DAMMATAN, KASRATAN):
            out.append(("N", unit.start, unit.end))
            prev_fathatan = mark == FATHATAN

    return out


def phonetize(word: str) -> list[str]:
    """Phoneme sequence for one fully diacritized Arabic word."""
    return [symbol for symbol, _, _ in phonetize_with_spans(word)]


# -- pronunciation dictionary ----------------------------------------------------------

_VARIANT_RE = re.compile(r"^(?P<word>.+)\((?P<n>\d+)\)$")


@dataclass(frozen=True)
class PronunciationEntry:
    word: str
    variant_index: int
    phonemes: tuple[str, ...]

    def __post_init__(self):
        if self.variant_index < 1:
            raise ValueError("variant_index must be >= 1")
        if not self.phonemes:
            raise ValueError("entry needs at least one phoneme")
        unknown = [p for p in self.phonemes if p not in INVENTORY]
        if unknown:
            raise UnknownPhonemeSymbol(f"symbols {unknown} not in inventory")


@dataclass(frozen=True)
class Lexicon:
    """Pronunciation entries in canonical (word, variant) order."""

    entries: tuple[PronunciationEntry, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.entries, key=lambda e: (e.word, e.variant_index)))
        object.__setattr__(self, "entries", ordered)
        seen = set()
        variants: dict[str, set] = {}
        for e in ordered:
            key = (e.word, e.variant_index)
            if key in seen:
                raise DuplicateVariant(f"duplicate entry {e.word}({e.variant_index})")
            seen.add(key)
            variants.setdefault(e.word, set()).add(e.variant_index)
        for word, indices in variants.items():
            if indices != set(range(1, len(indices) + 1)):
                raise DuplicateVariant(
                    f"word {word!r} has orphan variant indices {sorted(indices)}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def words(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for e in self.entries:
            seen.setdefault(e.word)
        return tuple(seen)

    def variants(self, word: str) -> tuple[PronunciationEntry, ...]:
        found = tuple(e for e in self.entries if e.word == word)
        if not found:
            raise KeyError(word)
        return found


def parse_dictionary(text: str) -> Lexicon:
    """Parse the one-entry-per-line dictionary format into a Lexicon."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise UnknownPhonemeSymbol(f"line {lineno}: entry has no phonemes")
        head, phones = tokens[0], tokens[1:]
        m = _VARIANT_RE.match(head)
        word, variant = (m.group("word"), int(m.group("n"))) if m else (head, 1)
        if variant < 1:
            raise DuplicateVariant(f"line {lineno}: variant index must be >= 1")
        unknown = [p for p in phones if p not in INVENTORY]
        if unknown:
            raise UnknownPhonemeSymbol(f"line {lineno}: unknown symbols {unknown}")
        entries.append(PronunciationEntry(word, variant, tuple(phones)))
    try:
        return Lexicon(tuple(entries))
    except DuplicateVariant as exc:
        raise DuplicateVariant(str(exc)) from None


def write_dictionary(lexicon: Lexicon) -> str:
    """Render a Lexicon in the canonical file format (sorted, Unix newlines)."""
    lines = []
    for e in lexicon.entries:
        head = e.word if e.variant_index == 1 else f"{e.word}({e.variant_index})"
        lines.append(" ".join([head, *e.phonemes]))
    return "\n".join(lines) + ("\n" if lines else "")


def build_dictionary(words: list[str]) -> Lexicon:
    """Phonetize a word list into a single-variant Lexicon (duplicates merged)."""
    if not words:
        raise EmptyLexicon("no words to build a dictionary from")
    entries = []
    for word in dict.fromkeys(w.strip() for w in words):
        try:
            entries.append(PronunciationEntry(word, 1, tuple(phonetize(word))))
        except (UnknownCharacter, UnvocalizedConsonant, EmptyInput) as exc:
            raise type(exc)(f"word {word!r}: {exc}") from None
    return Lexicon(tuple(entries))
