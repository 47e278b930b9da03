"""Free-group words, presentation files, and free reduction.

The word grammar:

    word     := factor+            juxtaposition is product, "*" permitted
    factor   := atom ("^" SINT)?
    atom     := NAME | "(" word ")" | "[" word "," word "]"

``[u, v]`` denotes u^-1 v^-1 u v.  Exponents are arbitrary signed
integers; reduction mod the presentation modulus happens only in the
truncated-group arithmetic, never here.

Presentation files are UTF-8 text of ``q = INT;``, ``gens = [a, b];``
and ``rels = ["a^2", ...];`` statements, with ``#`` line comments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .zqlin import prime_power

MAX_EXPONENT = 2**63 - 1


class ParseError(ValueError):
    """Syntax error, carrying 1-based line/column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.bare_message = message
        self.line = line
        self.col = col


class PresentationError(ValueError):
    """Semantically invalid presentation (bad modulus, duplicate names...)."""


# ---------------------------------------------------------------------------
# Word AST


@dataclass(frozen=True)
class Generator:
    index: int


@dataclass(frozen=True)
class Inverse:
    body: "Word"


@dataclass(frozen=True)
class Power:
    body: "Word"
    exponent: int


@dataclass(frozen=True)
class Product:
    factors: tuple["Word", ...]


@dataclass(frozen=True)
class Commutator:
    left: "Word"
    right: "Word"


Word = Generator | Inverse | Power | Product | Commutator

IDENTITY = Product(())


def pretty(word: Word, names: Sequence[str]) -> str:
    """Render a word in the input grammar; reparsing gives an equal AST."""
    match word:
        case Generator(k):
            return names[k]
        case Inverse(body):
            return f"{_atom(body, names)}^-1"
        case Power(body, e):
            return f"{_atom(body, names)}^{e}"
        case Commutator(a, b):
            return f"[{pretty(a, names)}, {pretty(b, names)}]"
        case Product(factors):
            if not factors:
                return "()"
            return " ".join(_atom(f, names) if isinstance(f, Product) else pretty(f, names)
                            for f in factors)
    raise TypeError(f"not a word node: {word!r}")


def _atom(word: Word, names: Sequence[str]) -> str:
    if isinstance(word, (Generator, Commutator)):
        return pretty(word, names)
    if isinstance(word, Product) and len(word.factors) != 1:
        return f"({pretty(word, names)})"
    return f"({pretty(word, names)})"


def generator_indices(word: Word) -> set[int]:
    match word:
        case Generator(k):
            return {k}
        case Inverse(b) | Power(b, _):
            return generator_indices(b)
        case Product(fs):
            out: set[int] = set()
            for f in fs:
               out |= generator_indices(f)
            return out
        case Commutator(a, b):
            return generator_indices(a) | generator_indices(b)
    raise TypeError(f"not a word node: {word!r}")


# ---------------------------------------------------------------------------
# Free reduction

Syllable = tuple[int, int]  # (generator index, nonzero exponent)


def letters(word: Word, sign: int = 1) -> list[Syllable]:
    """Flatten to generator powers, expanding commutators definitionally."""
    match word:
        case Generator(k):
            return [(k, sign)]
        case Inverse(b):
            return letters(b, -sign)
        case Power(b, e):
            if e == 0:
                return []
            seq = letters(b, 1 if e > 0 else -1)
            total = seq * abs(e) if sign > 0 else [(g, -x) for g, x in reversed(seq)] * abs(e)
            return total
        case Product(fs):
            if sign > 0:
                out = []
                for f in fs:
                    out.extend(letters(f, 1))
                return out
            out = []
            for f in reversed(fs):
                out.extend(letters(f, -1))
            return out
        case Commutator(a, b):
            expanded = Product((Inverse(a), Inverse(b), a, b))
            return letters(expanded, sign)
    raise TypeError(f"not a word node: {word!r}")


def reduce_syllables(seq: Sequence[Syllable]) -> list[Syllable]:
    out: list[Syllable] = []
    for g, e in seq:
        if e == 0:
            continue
        if out and out[-1][0] == g:
            merged = out[-1][1] + e
            out.pop()
            if merged:
                out.append((g, merged))
        else:
            out.append((g, e))
    return out


def free_reduce(word: Word, expand_commutators: bool = True) -> Word:
    """Canonical reduced form in the free group.

    With expand_commutators set, every ``[u, v]`` is rewritten to
    u^-1 v^-1 u v first, so the result is a flat product of generator
    powers.  Otherwise commutators are kept as atoms; ones with freely
    equal or trivial arguments are dropped.
    """
    if expand_commutators:
        return syllables_to_word(reduce_syllables(letters(word)))
    return _reduce_shallow(word)


def _reduce_shallow(word: Word) -> Word:
    match word:
        case Commutator(a, b):
            ra = free_reduce(a, False)
            rb = free_reduce(b, False)
            if ra == IDENTITY or rb == IDENTITY or ra == rb:
                return IDENTITY
            return Commutator(ra, rb)
        case Inverse(b):
            rb = _reduce_shallow(b)
            if rb == IDENTITY:
                return IDENTITY
            return Inverse(rb)
        case Power(b, e):
            rb = _reduce_shallow(b)
            if rb == IDENTITY or e == 0:
                return IDENTITY
            return rb if e == 1 else Power(rb, e)
        case Product(fs):
            flat: list[Word] = []
            for f in fs:
                rf = _reduce_shallow(f)
                if rf == IDENTITY:
                    continue
                if isinstance(rf, Product):
                    flat.extend(rf.factors)
                else:
                    flat.append(rf)
            # cancel adjacent syllables of plain generator powers
            merged = _merge_generator_runs(flat)
            if len(merged) == 1:
                return merged[0]
            return Product(tuple(merged))
        case _:
            return word


def _merge_generator_runs(factors: list[Word]) -> list[Word]:
    out: list[Word] = []
    for f in factors:
        s = _as_syllable(f)
        if s is not None and out:
            prev = _as_syllable(out[-1])
            if prev is not None and prev[0] == s[0]:
                e = prev[1] + s[1]
                out.pop()
                if e:
                    out.append(syllables_to_word([(s[0], e)]))
                continue
        out.append(f)
    return out


def _as_syllable(f: Word) -> Syllable | None:
    match f:
        case Generator(k):
            return (k, 1)
        case Inverse(Generator(k)):
            return (k, -1)
        case Power(Generator(k), e):
            return (k, e)
    return None


def syllables_to_word(seq: Sequence[Syllable]) -> Word:
    factors: list[Word] = []
    for g, e in seq:
        if e == 1:
            factors.append(Generator(g))
        elif e != 0:
            factors.append(Power(Generator(g), e))
    if len(factors) == 1:
        return factors[0]
    return Product(tuple(factors))


def exponent_sums(word: Word, n: int) -> list[int]:
    """Integer exponent sum of each generator (the abelianized image)."""
    sums = [0] * n
    for g, e in letters(word):
        sums[g] += e
    return sums


# ---------------------------------------------------------------------------
# Tokenizer


@dataclass(frozen=True)
class _Token:
    kind: str  # NAME INT PUNCT STRING EOF
    text: str
    line: int
    col: int


_PUNCT = set("=;,[]()^*")


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
        elif ch == '"':
            start_line, start_col = line, col
            j = text.find('"', i + 1)
            if j < 0 or "\n" in text[i + 1:j]:
                raise ParseError("unterminated string", start_line, start_col)
            tokens.append(_Token("STRING", text[i + 1:j], start_line, start_col))
            col += j - i + 1
            i = j + 1
        elif ch.isalpha():
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("NAME", text[i:j], line, col))
            col += j - i
            i = j
        elif ch.isdigit() or (ch == "-" and i + 1 < len(text) and text[i + 1].isdigit()):
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(_Token("INT", text[i:j], line, col))
            col += j - i
            i = j
        elif ch in _PUNCT:
            tokens.append(_Token("PUNCT", ch, line, col))
            i += 1
            col += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _TokenStream:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise ParseError(f"expected {want!r}, found {tok.text or tok.kind!r}", tok.line, tok.col)
        return self.next()


# ---------------------------------------------------------------------------
# Word parser


def _parse_word_tokens(ts: _TokenStream, name_to_index: dict[str, int]) -> Word:
    factors = [_parse_factor(ts, name_to_index)]
    while True:
        tok = ts.peek()
        if tok.kind == "PUNCT" and tok.text == "*":
            ts.next()
            factors.append(_parse_factor(ts, name_to_index))
        elif tok.kind == "NAME" or (tok.kind == "PUNCT" and tok.text in "(["):
            factors.append(_parse_factor(ts, name_to_index))
        else:
            break
    if len(factors) == 1:
        return factors[0]
    return Product(tuple(factors))


def _parse_factor(ts: _TokenStream, name_to_index: dict[str, int]) -> Word:
    atom = _parse_atom(ts, name_to_index)
    tok = ts.peek()
    if tok.kind == "PUNCT" and tok.text == "^":
        ts.next()
        e_tok = ts.peek()
        if e_tok.kind != "INT":
            raise ParseError("expected integer exponent after '^'", e_tok.line, e_tok.col)
        ts.next()
        e = int(e_tok.text)
        if abs(e) > MAX_EXPONENT:
            raise ParseError("exponent out of range", e_tok.line, e_tok.col)
        if e == -1:
            return Inverse(atom)
        return Power(atom, e)
    return atom


def _parse_atom(ts: _TokenStream, name_to_index: dict[str, int]) -> Word:
    tok = ts.peek()
    if tok.kind == "NAME":
        ts.next()
        if tok.text not in name_to_index:
            raise ParseError(f"unknown generator {tok.text!r}", tok.line, tok.col)
        return Generator(name_to_index[tok.text])
    if tok.kind == "PUNCT" and tok.text == "(":
        ts.next()
        inner = _parse_word_tokens(ts, name_to_index)
        ts.expect("PUNCT", ")")
        return inner
    if tok.kind == "PUNCT" and tok.text == "[":
        ts.next()
        left = _parse_word_tokens(ts, name_to_index)
        ts.expect("PUNCT", ",")
        right = _parse_word_tokens(ts, name_to_index)
        ts.expect("PUNCT", "]")
        return Commutator(left, right)
    raise ParseError(f"expected a word atom, found {tok.text or tok.kind!r}", tok.line, tok.col)


# ---------------------------------------------------------------------------
# Presentations


@dataclass(frozen=True)
class Presentation:
    """Data of 1 -> R -> S -> G -> 1: modulus, generators, relators."""

    q: int
    p: int
    d: int
    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    relator_sources: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.generators)

    def name_map(self) -> dict[str, int]:
        return {name: k for k, name in enumerate(self.generators)}


def make_presentation(q: int, generators: Sequence[str], relator_texts: Sequence[str]) -> Presentation:
    try:
        p, d = prime_power(q)
    except ValueError as exc:
        raise PresentationError(str(exc)) from None
    gens = tuple(generators)
    if not gens:
        raise PresentationError("at least one generator is required")
    if len(set(gens)) != len(gens):
        dupes = sorted({g for g in gens if list(gens).count(g) > 1})
        raise PresentationError(f"duplicate generator names: {', '.join(dupes)}")
    name_to_index = {name: k for k, name in enumerate(gens)}
    relators = []
    for i, text in enumerate(relator_texts):
        try:
            relators.append(parse_word(text, name_to_index))
        except ParseError as exc:
            raise ParseError(f"in relator {i + 1} ({text!r}): {exc.bare_message}",
                             exc.line, exc.col) from None
    return Presentation(q, p, d, gens, tuple(relators), tuple(relator_texts))


def relator_source_list(p: Presentation) -> tuple[str, ...]:
    """Relator display strings, regenerated when the originals are absent."""
    if len(p.relator_sources) == len(p.relators):
        return p.relator_sources
    return tuple(pretty(w, p.generators) for w in p.relators)


def parse_word(text: str, ctx: Presentation | dict[str, int]) -> Word:
    """Parse a single word; ctx supplies the generator names."""
    name_to_index = ctx.name_map() if isinstance(ctx, Presentation) else ctx
    ts = _TokenStream(_tokenize(text))
    word = _parse_word_tokens(ts, name_to_index)
    tok = ts.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return word


def parse_presentation(text: str) -> Presentation:
    ts = _TokenStream(_tokenize(text))
    q: int | None = None
    gens: list[str] | None = None
    rel_texts: list[str] | None = None
    while ts.peek().kind != "EOF":
        tok = ts.expect("NAME")
        if tok.text == "q":
            if q is not None:
                raise ParseError("duplicate 'q' statement", tok.line, tok.col)
            ts.expect("PUNCT", "=")
            q_tok = ts.expect("INT")
            q = int(q_tok.text)
            ts.expect("PUNCT", ";")
        elif tok.text == "gens":
            if gens is not None:
                raise ParseError("duplicate 'gens' statement", tok.line, tok.col)
            ts.expect("PUNCT", "=")
            ts.expect("PUNCT", "[")
            gens = [ts.expect("NAME").text]
            while ts.peek().text == ",":
                ts.next()
                gens.append(ts.expect("NAME").text)
            ts.expect("PUNCT", "]")
            ts.expect("PUNCT", ";")
        elif tok.text == "rels":
            if rel_texts is not None:
                raise ParseError("duplicate 'rels' statement", tok.line, tok.col)
            ts.expect("PUNCT", "=")
            ts.expect("PUNCT", "[")
            rel_texts = []
            if ts.peek().kind == "STRING":
                rel_texts.append(ts.next().text)
                while ts.peek().text == ",":
                    ts.next()
                    rel_texts.append(ts.expect("STRING").text)
            ts.expect("PUNCT", "]")
            ts.expect("PUNCT", ";")
        else:
            raise ParseError(f"unknown statement {tok.text!r}", tok.line, tok.col)
    if q is None:
        raise ParseError("missing 'q' statement", 1, 1)
    if gens is None:
        raise ParseError("missing 'gens' statement", 1, 1)
    return make_presentation(q, gens, rel_texts or [])
