"""Braid-like diagrams of spatial graphs with univalent and trivalent vertices.

A word is read bottom to top.  Each token acts on the row of strands:

=========  =====================================  ==============
token      action                                 strands
=========  =====================================  ==============
``cup``    a strand starts (univalent vertex)      0 -> 1
``cupi``   a strand starts at position ``i``       n -> n+1
``cap``    the last strand ends                    1 -> 0
``capi``   strand ``i`` ends                       n -> n-1
``Yi``     strand ``i`` splits in two              n -> n+1
``Li``     strands ``i``, ``i+1`` merge            n -> n-1
``si``     strand ``i`` crosses over ``i+1``       n -> n
``si^-1``  strand ``i+1`` crosses over ``i``       n -> n
=========  =====================================  ==============

``S2`` and ``s2⁻¹`` are accepted spellings of ``s2^-1`` and ``Λ``/``σ`` of
``L``/``s``.  A closed word starts and ends with no strands.
"""

from __future__ import annotations

import heapq
import random
import re
from dataclasses import dataclass

from .errors import LexError, PatternMismatch, StrandCountError

__all__ = [
    "Token",
    "DiagramWord",
    "parse",
    "render",
    "apply_move",
    "moves",
    "normalize",
    "random_word",
    "MOVES",
    "to_dot",
    "burau",
]

MOVES = ("crossing-cancel", "unwind", "whitehead", "braid-relation", "retract")

# inputs consumed, outputs produced, starting at the token's position
_ARITY = {"cup": (0, 1), "cap": (1, 0), "Y": (1, 2), "L": (2, 1), "s": (2, 2)}


@dataclass(frozen=True, order=True)
class Token:
    kind: str  # cup, cap, Y, L, s
    i: int  # 1-based position
    sign: int = 1  # crossings only

    @property
    def arity(self) -> tuple[int, int]:
        return _ARITY[self.kind]

    def inverse(self) -> "Token":
        return Token("s", self.i, -self.sign)

    def shifted(self, d: int) -> "Token":
        return Token(self.kind, self.i + d, self.sign)


def _crossing(i, sign=1):
    return Token("s", i, sign)


_TOKEN_RE = re.compile(
    r"^(?:(?P<cc>cup|cap)(?P<ci>\d+)?|(?P<v>Y|L|Λ)(?P<vi>\d+)|(?P<s>s|σ|S)(?P<si>\d+)(?P<inv>\^-1|\^\{-1\}|⁻¹)?)$"
)


def _lex(text: str) -> list[tuple[Token, bool]]:
    """Tokens with a flag telling whether a cup/cap was written without index."""
    out = []
    for pos, raw in enumerate(text.split()):
        m = _TOKEN_RE.match(raw)
        if not m:
            raise LexError(f"token {pos}: cannot read {raw!r}")
        if m.group("cc"):
            idx = m.group("ci")
            out.append((Token(m.group("cc"), int(idx) if idx else 1), idx is None))
        elif m.group("v"):
            kind = "Y" if m.group("v") == "Y" else "L"
            out.append((Token(kind, int(m.group("vi"))), False))
        else:
            sign = -1 if (m.group("inv") or m.group("s") == "S") else 1
            if m.group("s") == "S" and m.group("inv"):
                sign = 1
            out.append((Token("s", int(m.group("si")), sign), False))
        if out[-1][0].i < 1:
            raise LexError(f"token {pos}: positions start at 1")
    return out


def _step(count: int, t: Token, pos: int, bare: bool = False) -> int:
    n_in, n_out = t.arity
    if bare and t.kind == "cup" and count != 0:
        raise StrandCountError("bare 'cup' needs an empty row; write cupI", pos, count)
    if bare and t.kind == "cap" and count != 1:
        raise StrandCountError("bare 'cap' needs exactly one strand; write capI", pos, count)
    hi = count + 1 if t.kind == "cup" else count - n_in + 1
    if not 1 <= t.i <= hi:
        raise StrandCountError(f"{render_token(t, count)} does not fit {count} strands", pos, count)
    return count - n_in + n_out


@dataclass(frozen=True)
class DiagramWord:
    tokens: tuple[Token, ...]

    @property
    def profile(self) -> list[int]:
        counts = [0]
        for k, t in enumerate(self.tokens):
            counts.append(_step(counts[-1], t, k))
        return counts

    @property
    def crossings(self) -> int:
        return sum(t.kind == "s" for t in self.tokens)

    @property
    def max_strands(self) -> int:
        return max(self.profile)

    @property
    def vertices(self) -> dict[str, int]:
        out = {"cup": 0, "cap": 0, "Y": 0, "L": 0}
        for t in self.tokens:
            if t.kind != "s":
                out[t.kind] += 1
        return out

    def is_planar(self) -> bool:
        return self.crossings == 0

    def __str__(self) -> str:
        return render(self)

    def __len__(self) -> int:
        return len(self.tokens)


def check_closed(tokens) -> list[int]:
    counts = [0]
    for k, t in enumerate(tokens):
        counts.append(_step(counts[-1], t, k))
    if counts[-1] != 0:
        raise StrandCountError("diagram is not closed", len(tokens), counts[-1])
    return counts


def parse(text: str) -> DiagramWord:
    lexed = _lex(text)
    count = 0
    for k, (t, bare) in enumerate(lexed):
        count = _step(count, t, k, bare)
    if count != 0:
        raise StrandCountError("diagram is not closed", len(lexed), count)
    return DiagramWord(tuple(t for t, _ in lexed))


def render_token(t: Token, count: int) -> str:
    if t.kind == "cup":
        return "cup" if count == 0 and t.i == 1 else f"cup{t.i}"
    if t.kind == "cap":
        return "cap" if count == 1 and t.i == 1 else f"cap{t.i}"
    if t.kind == "s":
        return f"s{t.i}" if t.sign > 0 else f"s{t.i}^-1"
    return f"{t.kind}{t.i}"


def render(w: DiagramWord) -> str:
    counts = w.profile
    return " ".join(render_token(t, counts[k]) for k, t in enumerate(w.tokens))


# --------------------------------------------------------------------------
# moves


def _commute(a: Token, b: Token) -> tuple[Token, Token] | None:
    """Swap two adjacent tokens acting on disjoint strands, with index shifts."""
    a_in, a_out = a.arity
    b_in, b_out = b.arity
    da, db = a_out - a_in, b_out - b_in
    if b.i + b_in - 1 < a.i:  # b lies left of a's outputs
        if b_in == 0 and b.i == a.i and a_out == 0:
            return None  # ambiguous zero-width pair, handled by the right case
        return b, a.shifted(db)
    if b.i >= a.i + a_out:  # b lies right of a's outputs
        return b.shifted(-da), a
    return None


def _pair_rewrites(a: Token, b: Token):
    """Rewrites of an adjacent pair: (move, replacement tokens)."""
    # crossing-cancel
    if a.kind == b.kind == "s" and a.i == b.i and a.sign == -b.sign:
        yield "crossing-cancel", ()
    # unwind at a vertex
    if a.kind == "Y" and b.kind == "s" and b.i == a.i:
        yield "unwind", (a,)
    if a.kind == "s" and b.kind == "L" and b.i == a.i:
        yield "unwind", (b,)
    if a.kind == "cup" and b.kind == "s":
        if b.i == a.i:
            yield "unwind", (Token("cup", a.i + 1),)
        elif b.i + 1 == a.i:
            yield "unwind", (Token("cup", a.i - 1),)
    if a.kind == "s" and b.kind == "cap":
        if b.i == a.i:
            yield "unwind", (Token("cap", a.i + 1),)
        elif b.i == a.i + 1:
            yield "unwind", (Token("cap", a.i),)
    # IH
    if a.kind == "L" and b.kind == "Y" and a.i == b.i:
        i = a.i
        yield "whitehead", (Token("Y", i), Token("L", i + 1))
        yield "whitehead", (Token("Y", i + 1), Token("L", i))
    if a.kind == "Y" and b.kind == "L" and b.i == a.i + 1:
        i = a.i
        yield "whitehead", (Token("L", i), Token("Y", i))
        yield "whitehead", (Token("Y", i + 1), Token("L", i))
    if a.kind == "Y" and b.kind == "L" and b.i == a.i - 1:
        i = b.i
        yield "whitehead", (Token("L", i), Token("Y", i))
        yield "whitehead", (Token("Y", i), Token("L", i + 1))
    # a univalent end retracts into its vertex, or a lone arc disappears
    if a.kind == "cup" and b.kind == "L" and a.i in (b.i, b.i + 1):
        yield "retract", ()
    if a.kind == "Y" and b.kind == "cap" and b.i in (a.i, a.i + 1):
        yield "retract", ()
    if a.kind == "cup" and b.kind == "cap" and a.i == b.i:
        yield "retract", ()
    # IH on two splits or two merges
    if a.kind == b.kind == "Y" and b.i in (a.i, a.i + 1):
        yield "whitehead", (a, Token("Y", a.i + (b.i == a.i)))
    if a.kind == b.kind == "L" and a.i in (b.i, b.i + 1):
        yield "whitehead", (Token("L", b.i + (a.i == b.i)), b)
    # a crossing slides through a vertex
    if a.kind == "s" and b.kind == "Y":
        i, e = a.i, a.sign
        if b.i == i + 1:
            yield "braid-relation", (Token("Y", i), _crossing(i + 1, e), _crossing(i, e))
        if b.i == i:
            yield "braid-relation", (Token("Y", i + 1), _crossing(i, e), _crossing(i + 1, e))
    if a.kind == "L" and b.kind == "s":
        i, e = b.i, b.sign
        if a.i == i + 1:
            yield "braid-relation", (_crossing(i, e), _crossing(i + 1, e), Token("L", i))
        if a.i == i:
            yield "braid-relation", (_crossing(i + 1, e), _crossing(i, e), Token("L", i + 1))
    # far commutation
    sw = _commute(a, b)
    if sw is not None:
        yield "braid-relation", sw


def _triple_rewrites(a: Token, b: Token, c: Token):
    if a.kind == b.kind == c.kind == "s":
        # s_i^x s_{i+1}^y s_i^z = s_{i+1}^z s_i^y s_{i+1}^x when x = y = z or x = -z
        if a.i == c.i and abs(b.i - a.i) == 1 and (a.sign == b.sign == c.sign or a.sign == -c.sign):
            yield "braid-relation", (_crossing(b.i, c.sign), _crossing(a.i, b.sign), _crossing(b.i, a.sign))
    # inverse vertex slides: three tokens collapse to crossing + vertex
    if a.kind == "Y" and b.kind == c.kind == "s" and b.sign == c.sign:
        i, e = a.i, b.sign
        if b.i == i + 1 and c.i == i:
            yield "braid-relation", (_crossing(i, e), Token("Y", i + 1))
        if a.i == b.i + 1 and c.i == a.i:
            yield "braid-relation", (_crossing(b.i, e), Token("Y", b.i))
    if c.kind == "L" and a.kind == b.kind == "s" and a.sign == b.sign:
        e = a.sign
        if b.i == a.i + 1 and c.i == a.i:
            yield "braid-relation", (Token("L", a.i + 1), _crossing(a.i, e))
        if a.i == b.i + 1 and c.i == a.i:
            yield "braid-relation", (Token("L", b.i), _crossing(b.i, e))


def moves(w: DiagramWord):
    """Every applicable ``(move, site, result)``; results are valid closed words."""
    t = w.tokens
    out = []
    for k in range(len(t) - 1):
        for name, rep in _pair_rewrites(t[k], t[k + 1]):
            out.append((name, k, t[:k] + tuple(rep) + t[k + 2 :]))
    for k in range(len(t) - 2):
        for name, rep in _triple_rewrites(t[k], t[k + 1], t[k + 2]):
            out.append((name, k, t[:k] + tuple(rep) + t[k + 3 :]))
    good = []
    for name, k, toks in out:
        try:
            check_closed(toks)
        except StrandCountError:
            continue
        good.append((name, k, DiagramWord(toks)))
    return good


def apply_move(w: DiagramWord, move: str, site: int, choice: int = 0) -> DiagramWord:
    """Apply ``move`` at token ``site``; ``choice`` picks among several outcomes."""
    if move not in MOVES:
        raise PatternMismatch(f"unknown move {move!r}")
    hits = [r for name, k, r in moves(w) if name == move and k == site]
    if not hits:
        raise PatternMismatch(f"{move} does not match at token {site}")
    if not 0 <= choice < len(hits):
        raise PatternMismatch(f"{move} at token {site} has {len(hits)} outcomes")
    return hits[choice]


@dataclass(frozen=True)
class NormalizeResult:
    word: DiagramWord
    status: str  # planar or budget-exhausted
    states: int
    trace: tuple[tuple[str, int], ...]

    def __iter__(self):
        yield self.word
        yield self.status


def normalize(w: DiagramWord, budget: int = 100_000) -> NormalizeResult:
    """Best-first search over moves for a crossing-free word.

    States are ordered by crossings, length, strand width and then search
    depth, with insertion order as the last tie-break, so the search and
    its result are deterministic.  The returned word never has more crossings
    than the input.
    """
    start = w.tokens

    def cost(toks):
        return sum(t.kind == "s" for t in toks), len(toks), max(check_closed(toks))

    heap = [(*cost(start), 0, 0, start)]
    parent: dict[tuple, tuple | None] = {start: None}
    best, best_cost = start, cost(start)
    expanded = pushed = 0
    while heap and expanded < budget:
        c, n, width, depth, _, toks = heapq.heappop(heap)
        expanded += 1
        if (c, n, width) < best_cost:
            best, best_cost = toks, (c, n, width)
        if c == 0:
            break
        for name, k, nxt in moves(DiagramWord(toks)):
            nt = nxt.tokens
            if nt not in parent:
                parent[nt] = (toks, name, k)
                pushed += 1
                heapq.heappush(heap, (*cost(nt), depth + 1, pushed, nt))
    trace = []
    cur = best
    while parent[cur] is not None:
        prev, name, k = parent[cur]
        trace.append((name, k))
        cur = prev
    status = "planar" if sum(t.kind == "s" for t in best) == 0 else "budget-exhausted"
    return NormalizeResult(DiagramWord(best), status, expanded, tuple(reversed(trace)))


# --------------------------------------------------------------------------
# corpus and export


def random_word(rng: random.Random, max_strands: int = 3, max_crossings: int = 8, max_len: int = 40) -> DiagramWord:
    """A random closed word that never exceeds ``max_strands`` strands."""
    toks: list[Token] = [Token("cup", 1)]
    n, cr = 1, 0
    while len(toks) < max_len:
        opts = []
        if n < max_strands:
            opts += [("Y", i) for i in range(1, n + 1)] + [("cup", i) for i in range(1, n + 2)]
        if n >= 2:
            opts += [("L", i) for i in range(1, n)]
            if cr < max_crossings:
                opts += [("s", i) for i in range(1, n)] * 3
        if n >= 2:
            opts += [("cap", i) for i in range(1, n + 1)]
        if not opts:
            break
        kind, i = rng.choice(opts)
        if kind == "s":
            toks.append(Token("s", i, rng.choice((1, -1))))
            cr += 1
        else:
            toks.append(Token(kind, i))
        n += _ARITY[kind][1] - _ARITY[kind][0]
    while n > 1:
        i = rng.randrange(1, n)
        toks.append(Token("L", i) if rng.random() < 0.5 else Token("cap", i))
        n -= 1
    toks.append(Token("cap", 1))
    check_closed(toks)
    return DiagramWord(tuple(toks))


def to_dot(w: DiagramWord) -> str:
    """The underlying graph; crossings are dropped, vertices become nodes."""
    lines = ["graph diagram {"]
    row: list[str] = []
    for k, t in enumerate(w.tokens):
        name = f"{t.kind}{k}"
        p = t.i - 1
        if t.kind == "s":
            row[p], row[p + 1] = row[p + 1], row[p]
            continue
        lines.append(f'  "{name}" [label="{t.kind}"];')
        if t.kind == "cup":
            row.insert(p, name)
        elif t.kind == "cap":
            lines.append(f'  "{row.pop(p)}" -- "{name}";')
        elif t.kind == "Y":
            lines.append(f'  "{row[p]}" -- "{name}";')
            row[p : p + 1] = [name, name]
        else:
            lines.append(f'  "{row[p]}" -- "{name}";')
            lines.append(f'  "{row[p + 1]}" -- "{name}";')
            row[p : p + 2] = [name]
    lines.append("}")
    return "\n".join(lines) + "\n"


def burau(tokens, n: int, q: complex = 0.5 + 0.3j):
    """Unreduced Burau matrix of a pure crossing word on ``n`` strands."""
    import numpy as np

    m = np.eye(n, dtype=complex)
    for t in tokens:
        if t.kind != "s":
            raise ValueError("Burau matrix needs crossings only")
        b = np.eye(n, dtype=complex)
        i = t.i - 1
        b[i : i + 2, i : i + 2] = [[1 - q, q], [1, 0]]
        if t.sign < 0:
            b[i : i + 2, i : i + 2] = np.linalg.inv(b[i : i + 2, i : i + 2])
        m = m @ b
    return m
