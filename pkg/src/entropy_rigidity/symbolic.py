"""Words over the obstacle alphabet {1..m}.

Consecutive symbols of an orbit's itinerary can never repeat, since a strictly
convex obstacle cannot be hit twice in a row.  A cyclic word also wraps around.
"""
from dataclasses import dataclass

from .errors import AdmissibilityError, ValidationError


@dataclass(frozen=True)
class SymbolicWord:
    symbols: tuple
    cyclic: bool = True

    @classmethod
    def parse(cls, text, cyclic=True):
        if isinstance(text, SymbolicWord):
            return text
        if isinstance(text, (list, tuple)):
            syms = tuple(int(c) for c in text)
        else:
            text = str(text).strip()
            if not text.isdigit():
                raise ValidationError("word %r must be a string of digits 1-9" % text)
            syms = tuple(int(c) for c in text)
        if not syms:
            raise ValidationError("empty word")
        return cls(syms, cyclic)

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return "".join(str(s) for s in self.symbols)

    def rotated(self, k):
        k %= len(self.symbols)
        return SymbolicWord(self.symbols[k:] + self.symbols[:k], self.cyclic)

    def reversed(self):
        return SymbolicWord(self.symbols[::-1], self.cyclic)

    def indices(self):
        """0-based obstacle indices."""
        return [s - 1 for s in self.symbols]


def first_violation(word, m=None):
    """Index i such that symbols i and i+1 (cyclically) coincide, or None."""
    syms = word.symbols
    if m is not None:
        for i, a in enumerate(syms):
            if not 1 <= a <= m:
                raise ValidationError("symbol %d at position %d outside 1..%d" % (a, i, m))
    n = len(syms)
    last = n if word.cyclic else n - 1
    for i in range(last):
        if syms[i] == syms[(i + 1) % n]:
            return i
    return None


def is_admissible(word, m):
    word = SymbolicWord.parse(word)
    if word.cyclic and len(word) == 1:
        return False
    return first_violation(word, m) is None


def require_admissible(word, m, what="word"):
    word = SymbolicWord.parse(word)
    if word.cyclic and len(word) < 2:
        raise AdmissibilityError("%s %s: a periodic word needs at least two symbols" % (what, word))
    i = first_violation(word, m)
    if i is not None:
        j = (i + 1) % len(word)
        raise AdmissibilityError("%s %s repeats symbol %d at positions %d,%d" % (what, word, word.symbols[i], i, j))
    return word


def horseshoe_word(w_O, w_c, n):
    """w_O repeated n+1 times followed by w_c, as a cyclic word."""
    w_O = SymbolicWord.parse(w_O)
    w_c = SymbolicWord.parse(w_c)
    if n < 0:
        raise ValidationError("n must be nonnegative")
    syms = w_O.symbols * (n + 1) + w_c.symbols
    out = SymbolicWord(syms, True)
    i = first_violation(out)
    if i is not None:
        j = (i + 1) % len(syms)
        raise AdmissibilityError("junction %d-%d of %s repeats symbol %d" % (i, j, out, syms[i]))
    return out


def homoclinic_word(w_O, w_c, depth):
    """Non-cyclic w_O^depth w_c w_O^depth."""
    w_O = SymbolicWord.parse(w_O)
    w_c = SymbolicWord.parse(w_c)
    syms = w_O.symbols * depth + w_c.symbols + w_O.symbols * depth
    out = SymbolicWord(syms, False)
    i = first_violation(out)
    if i is not None:
        raise AdmissibilityError("junction %d-%d of %s repeats symbol %d" % (i, i + 1, out, syms[i]))
    return out
