import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdomain.diagram import (
    MOVES,
    DiagramWord,
    Token,
    apply_move,
    burau,
    moves,
    normalize,
    parse,
    random_word,
    render,
    to_dot,
)
from bdomain.errors import LexError, PatternMismatch, StrandCountError

TWIST = "cup Y1 s1 L1 cap"
WHITEHEAD = "cup Y1 Y2 s2 s1 L1 Y1 s2 s1^-1 L2 L1 cap"


def test_spellings_agree():
    a = parse("cup Y1 s1^-1 L1 cap")
    for alt in ("cup Y1 s1^{-1} Λ1 cap", "cup Y1 σ1⁻¹ L1 cap", "cup1 Y1 S1 L1 cap1"):
        assert parse(alt) == a
    assert render(a) == "cup Y1 s1^-1 L1 cap"


def test_profile():
    w = parse(WHITEHEAD)
    assert w.profile[0] == w.profile[-1] == 0
    assert w.max_strands == 3 and w.crossings == 4


def test_lex_error():
    with pytest.raises(LexError):
        parse("cup Q1 cap")


def test_open_word_rejected():
    with pytest.raises(StrandCountError) as err:
        parse("cup Y1")
    assert err.value.count == 2


def test_bare_cap_needs_one_strand():
    with pytest.raises(StrandCountError):
        parse("cup Y1 cap")


def test_crossing_out_of_range():
    with pytest.raises(StrandCountError) as err:
        parse("cup s2 cap")
    assert err.value.position == 1


def test_twist_unwinds():
    res = normalize(parse(TWIST))
    assert res.status == "planar" and res.states <= 10
    assert [m for m, _ in res.trace] == ["unwind"]


def test_whitehead_pattern_planar():
    res = normalize(parse(WHITEHEAD))
    assert res.status == "planar" and res.states <= 10_000
    used = {m for m, _ in res.trace}
    assert "whitehead" in used


def test_random_corpus_sample():
    rng = random.Random(1)
    for _ in range(10):
        w = random_word(rng)
        assert w.max_strands <= 3 and w.crossings <= 8
        assert normalize(w).status == "planar"


def test_normalize_is_deterministic():
    w = parse(WHITEHEAD)
    assert normalize(w) == normalize(w)


def test_apply_move_and_mismatch():
    w = parse(TWIST)
    assert render(apply_move(w, "unwind", 1)) == "cup Y1 L1 cap"
    with pytest.raises(PatternMismatch):
        apply_move(w, "whitehead", 0)
    with pytest.raises(PatternMismatch):
        apply_move(w, "teleport", 0)
    assert set(MOVES) >= {name for name, _, _ in moves(w)}


def test_every_move_result_is_closed():
    rng = random.Random(7)
    for _ in range(20):
        w = random_word(rng)
        for _, _, r in moves(w):
            assert r.profile[-1] == 0


def closure(braid):
    """Four leaf ends feeding a pure crossing word and four leaf ends after it."""
    return DiagramWord((*[Token("cup", 1)] * 4, *braid, *[Token("cap", 1)] * 4))


crossings = st.lists(st.tuples(st.integers(1, 3), st.sampled_from([1, -1])), min_size=2, max_size=9)


@settings(max_examples=80, deadline=None)
@given(crossings)
def test_braid_moves_preserve_burau(word):
    braid = tuple(Token("s", i, e) for i, e in word)
    w = closure(braid)
    ref = burau(braid, 4)
    for name, _, r in moves(w):
        if name not in ("braid-relation", "crossing-cancel"):
            continue
        t = r.tokens
        if t[:4] != w.tokens[:4] or t[-4:] != w.tokens[-4:]:
            continue
        mid = t[4:-4]
        if all(x.kind == "s" for x in mid):
            assert np.allclose(burau(mid, 4), ref), (name, render(w), render(r))


def test_braid_relation_instance():
    w = closure((Token("s", 1), Token("s", 2), Token("s", 1)))
    hits = [r for name, _, r in moves(w) if name == "braid-relation"]
    assert any(r.tokens[4:7] == (Token("s", 2), Token("s", 1), Token("s", 2)) for r in hits)


def test_dot_export():
    dot = to_dot(parse(TWIST))
    assert dot.startswith("graph") or dot.startswith("digraph")
