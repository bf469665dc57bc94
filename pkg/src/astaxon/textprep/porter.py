"""Porter suffix-stripping stemmer.

Implements the original 1980 rule table (not Porter2/Snowball).  Martin
Porter's reference C code, which produced the public ``voc.txt`` /
``output.txt`` vocabulary pair, edits two step-2 rules (``bli`` instead of
``abli``, plus an extra ``logi`` rule); ``reference_edits=True`` enables
them and reproduces that vocabulary exactly.

Conditions on the stem (measure, vowel presence, double consonant, cvc)
are evaluated over the ASCII letters of the stem only.  Suffixes are all
ASCII, so non-ASCII characters and digits are never rewritten.
"""

from __future__ import annotations

_VOWELS = frozenset("aeiou")
_ASCII_LETTERS = frozenset("abcdefghijklmnopqrstuvwxyz")

_STEP2_REFERENCE = (
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("bli", "ble"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
    ("logi", "log"),
)

_STEP2 = tuple(
    ("abli", "able") if suffix == "bli" else (suffix, repl)
    for suffix, repl in _STEP2_REFERENCE
    if suffix != "logi"
)

_STEP3 = (
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
)

_STEP4 = (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


def _letters(stem: str) -> str:
    return "".join(ch for ch in stem if ch in _ASCII_LETTERS)


def _is_cons(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of VC sequences in ``[C](VC)^m[V]``."""
    word = _letters(stem)
    n = len(word)
    i = 0
    while i < n and _is_cons(word, i):
        i += 1
    m = 0
    while i < n:
        while i < n and not _is_cons(word, i):
            i += 1
        if i >= n:
            break
        while i < n and _is_cons(word, i):
            i += 1
        m += 1
    return m


def _has_vowel(stem: str) -> bool:
    word = _letters(stem)
    return any(not _is_cons(word, i) for i in range(len(word)))


def _ends_double_cons(stem: str) -> bool:
    word = _letters(stem)
    return len(word) >= 2 and word[-1] == word[-2] and _is_cons(word, len(word) - 1)


def _ends_cvc(stem: str) -> bool:
    word = _letters(stem)
    n = len(word)
    if n < 3:
        return False
    if not (_is_cons(word, n - 3) and not _is_cons(word, n - 2) and _is_cons(word, n - 1)):
        return False
    return word[-1] not in "wxy"


def _step1ab(w: str) -> str:
    if w.endswith("s"):
        if w.endswith("sses"):
            w = w[:-2]
        elif w.endswith("ies"):
            w = w[:-2]
        elif not w.endswith("ss"):
            w = w[:-1]

    if w.endswith("eed"):
        if _measure(w[:-3]) > 0:
            w = w[:-1]
        return w

    for suffix in ("ed", "ing"):
        if w.endswith(suffix) and _has_vowel(w[: -len(suffix)]):
            w = w[: -len(suffix)]
            if w.endswith(("at", "bl", "iz")):
                return w + "e"
            if _ends_double_cons(w) and w[-1] not in "lsz":
                return w[:-1]
            if _measure(w) == 1 and _ends_cvc(w):
                return w + "e"
            return w
    return w


def _step1c(w: str) -> str:
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


def _replace_first(w: str, table, min_measure: int) -> str:
    # Longest matching suffix wins; if its condition fails, nothing changes.
    best = None
    for suffix, repl in table:
        if w.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, repl)
    if best is None:
        return w
    suffix, repl = best
    stem = w[: -len(suffix)]
    if _measure(stem) > min_measure:
        return stem + repl
    return w


def _step4(w: str) -> str:
    best = None
    for suffix in _STEP4:
        if w.endswith(suffix) and (best is None or len(suffix) > len(best)):
            best = suffix
    if best is None:
        return w
    stem = w[: -len(best)]
    if best == "ion" and not stem.endswith(("s", "t")):
        return w
    if _measure(stem) > 1:
        return stem
    return w


def _step5(w: str) -> str:
    if w.endswith("e"):
        m = _measure(w[:-1])
        if m > 1 or (m == 1 and not _ends_cvc(w[:-1])):
            w = w[:-1]
    if w.endswith("ll") and _measure(w) > 1:
        w = w[:-1]
    return w


def porter_stem(word: str, reference_edits: bool = False) -> str:
    """Return the Porter stem of a lowercase token.

    >>> porter_stem("university"), porter_stem("exchange")
    ('univers', 'exchang')
    """
    if len(word) <= 2 or not _letters(word):
        return word
    w = _step1ab(word)
    w = _step1c(w)
    w = _replace_first(w, _STEP2_REFERENCE if reference_edits else _STEP2, 0)
    w = _replace_first(w, _STEP3, 0)
    w = _step4(w)
    w = _step5(w)
    return w
