import pytest
from hypothesis import given, strategies as st

from entropy_rigidity.errors import AdmissibilityError, ValidationError
from entropy_rigidity.symbolic import (SymbolicWord, homoclinic_word, horseshoe_word, is_admissible,
                                       require_admissible)


@pytest.mark.parametrize("word, ok", [("121", False), ("12", True), ("1213", True), ("1", False),
                                      ("11", False), ("123", True)])
def test_admissibility(word, ok):
    assert is_admissible(word, 3) is ok


def test_noncyclic_admissibility():
    assert is_admissible(SymbolicWord.parse("121", cyclic=False), 3)


def test_symbols_outside_alphabet():
    with pytest.raises(ValidationError):
        is_admissible("14", 3)
    with pytest.raises(ValidationError):
        SymbolicWord.parse("1a")


def test_horseshoe_words():
    assert str(horseshoe_word("12", "13", 0)) == "1213"
    assert str(horseshoe_word("12", "13", 2)) == "12121213"
    with pytest.raises(AdmissibilityError):
        horseshoe_word("12", "21", 0)


def test_homoclinic_word():
    w = homoclinic_word("12", "13", 2)
    assert str(w) == "121213" + "1212" and not w.cyclic


def test_require_admissible_names_the_position():
    with pytest.raises(AdmissibilityError, match="positions 3,0"):
        require_admissible("1231", 3)


def blocks(m):
    # admissible cyclic words over 1..m
    return st.lists(st.integers(1, m), min_size=2, max_size=6).filter(
        lambda w: all(w[i] != w[(i + 1) % len(w)] for i in range(len(w))))


@given(blocks(4), blocks(4), st.integers(0, 12))
def test_horseshoe_word_properties(w_O, w_c, n):
    w = SymbolicWord(tuple(w_O))
    c = SymbolicWord(tuple(w_c))
    if w_O[-1] == w_c[0] or w_c[-1] == w_O[0]:
        with pytest.raises(AdmissibilityError):
            horseshoe_word(w, c, n)
        return
    h = horseshoe_word(w, c, n)
    assert len(h) == (n + 1) * len(w_O) + len(w_c)
    assert is_admissible(h, 4)


@given(blocks(3), st.integers(0, 10))
def test_rotation_preserves_admissibility(w, k):
    word = SymbolicWord(tuple(w))
    assert is_admissible(word.rotated(k), 3)
    assert is_admissible(word.reversed(), 3)
