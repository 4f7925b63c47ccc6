"""Exact symbolic calculus in the Cuntz algebra O_n.

Elements are finite linear combinations of normal-ordered monomials
S_alpha S_beta* with coefficients in Q + Qi. The two defining relation
families

    S_i* S_j = delta_ij . 1        sum_i S_i S_i* = 1

make every *-polynomial in the generators equal to such a combination, and
products of normal-ordered monomials reduce in one step:

    (S_alpha S_beta*)(S_gamma S_delta*) =
        S_{alpha gamma'} S_delta*   if gamma = beta gamma'
        S_alpha S_{delta beta'}*    if beta = gamma beta'
        0                           otherwise.

Equality of elements is decidable but not by comparing stored terms: the
unit relation lets one monomial spread into n refinements,

    S_alpha S_beta* = sum_c S_{alpha c} S_{beta c}*.

Fixing the grade g = l(alpha) - l(beta), the monomials with prescribed
lengths are linearly independent, so two elements agree iff, grade by
grade, padding both to a common refinement level yields identical
coefficient tables. That is exactly what __eq__ does.

Coefficients are exact complex rationals (a pair of fractions.Fraction);
no floats enter anywhere.
"""

from __future__ import annotations

import json
import re as _re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Tuple, Union

from .words import Word, check_alphabet, check_word, word_from_string, word_to_string

WordTuple = Tuple[int, ...]
TermKey = Tuple[WordTuple, WordTuple]


@dataclass(frozen=True)
class Coefficient:
    """An exact complex rational re + im*i."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @staticmethod
    def of(value: "CoeffLike") -> "Coefficient":
        """Coerce ints, Fractions, or pairs into a Coefficient."""
        if isinstance(value, Coefficient):
            return value
        if isinstance(value, (int, Fraction)):
            return Coefficient(Fraction(value))
        if isinstance(value, tuple) and len(value) == 2:
            return Coefficient(Fraction(value[0]), Fraction(value[1]))
        raise TypeError(f"cannot interpret {value!r} as an exact complex rational")

    def __add__(self, other: "Coefficient") -> "Coefficient":
        return Coefficient(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "Coefficient") -> "Coefficient":
        return Coefficient(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "Coefficient") -> "Coefficient":
        return Coefficient(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __neg__(self) -> "Coefficient":
        return Coefficient(-self.re, -self.im)

    def conjugate(self) -> "Coefficient":
        return Coefficient(self.re, -self.im)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __str__(self) -> str:
        return format_coefficient(self)


CoeffLike = Union[Coefficient, int, Fraction, Tuple[int, int]]

ZERO = Coefficient()
ONE = Coefficient(Fraction(1))
I = Coefficient(Fraction(0), Fraction(1))


def format_coefficient(c: Coefficient) -> str:
    """Render a coefficient the way elements print it.

    Plain non-negative rationals print bare; anything carrying a sign or an
    imaginary part is parenthesized so the result re-parses unambiguously
    inside a product.
    """
    if not c.im:
        s = str(c.re)
        return f"({s})" if s.startswith("-") else s
    im_mag = "" if abs(c.im) == 1 else str(abs(c.im))
    im_part = f"{im_mag}i"
    if not c.re:
        sign = "-" if c.im < 0 else ""
        return f"({sign}{im_part})"
    sign = "-" if c.im < 0 else "+"
    return f"({c.re}{sign}{im_part})"


@dataclass(frozen=True)
class NormalTerm:
    """One normal-ordered monomial S_alpha S_beta* of an element."""

    alpha: Word
    beta: Word

    def __str__(self) -> str:
        parts = []
        if len(self.alpha):
            parts.append(f"S({self.alpha})")
        if len(self.beta):
            parts.append(f"S*({self.beta})")
        return "".join(parts) if parts else "1"


class AlgebraElement:
    """A finite Q(i)-linear combination of monomials S_alpha S_beta* in O_n.

    Internally a dict from (alpha, beta) letter-tuples to nonzero
    Coefficients. Elements are immutable by convention: every operation
    returns a fresh instance and nothing mutates _data after construction.
    """

    __slots__ = ("n", "_data")

    def __init__(self, n: int, data: Optional[Dict[TermKey, Coefficient]] = None):
        check_alphabet(n)
        self.n = n
        self._data: Dict[TermKey, Coefficient] = {}
        if data:
            for key, coeff in data.items():
                if coeff:
                    check_word(n, key[0])
                    check_word(n, key[1])
                    self._data[key] = coeff

    # ---- constructors -------------------------------------------------

    @staticmethod
    def zero(n: int) -> "AlgebraElement":
        return AlgebraElement(n)

    @staticmethod
    def one(n: int) -> "AlgebraElement":
        return AlgebraElement(n, {((), ()): ONE})

    @staticmethod
    def scalar(n: int, value: CoeffLike) -> "AlgebraElement":
        return AlgebraElement(n, {((), ()): Coefficient.of(value)})

    @staticmethod
    def isometry(n: int, alpha: Iterable[int]) -> "AlgebraElement":
        """The product isometry S_alpha; S of the empty word is the unit."""
        return AlgebraElement(n, {(tuple(alpha), ()): ONE})

    @staticmethod
    def monomial(
        n: int,
        alpha: Iterable[int],
        beta: Iterable[int],
        coeff: CoeffLike = 1,
    ) -> "AlgebraElement":
        return AlgebraElement(n, {(tuple(alpha), tuple(beta)): Coefficient.of(coeff)})

    @staticmethod
    def projection(n: int, alpha: Iterable[int]) -> "AlgebraElement":
        """The diagonal range projection P_alpha = S_alpha S_alpha*."""
        a = tuple(alpha)
        return AlgebraElement(n, {(a, a): ONE})

    # ---- inspection ---------------------------------------------------

    def terms(self) -> Iterator[Tuple[NormalTerm, Coefficient]]:
        """Stored terms in the graded-lexicographic order used for printing."""
        for alpha, beta in sorted(
            self._data, key=lambda k: (len(k[0]), k[0], len(k[1]), k[1])
        ):
            yield (
                NormalTerm(Word(self.n, alpha), Word(self.n, beta)),
                self._data[(alpha, beta)],
            )

    def term_count(self) -> int:
        return len(self._data)

    def coefficient(self, alpha: Iterable[int], beta: Iterable[int]) -> Coefficient:
        return self._data.get((tuple(alpha), tuple(beta)), ZERO)

    def is_zero(self) -> bool:
        return not self._data

    def max_word_length(self) -> int:
        if not self._data:
            return 0
        return max(max(len(a), len(b)) for a, b in self._data)

    def grades(self) -> List[int]:
        """Sorted gauge grades l(alpha) - l(beta) present in the element."""
        return sorted({len(a) - len(b) for a, b in self._data})

    # ---- ring operations ----------------------------------------------

    def _check_compatible(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"mixed alphabets: O_{self.n} and O_{other.n}")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_compatible(other)
        data = dict(self._data)
        for key, coeff in other._data.items():
            total = data.get(key, ZERO) + coeff
            if total:
                data[key] = total
            else:
                data.pop(key, None)
        return AlgebraElement(self.n, data)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.n, {k: -c for k, c in self._data.items()})

    def scale(self, value: CoeffLike) -> "AlgebraElement":
        z = Coefficient.of(value)
        if not z:
            return AlgebraElement.zero(self.n)
        return AlgebraElement(self.n, {k: z * c for k, c in self._data.items()})

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        """Product, reduced to normal order term by term."""
        self._check_compatible(other)
        data: Dict[TermKey, Coefficient] = {}
        for (a1, b1), c1 in self._data.items():
            for (a2, b2), c2 in other._data.items():
                # Reduce S_b1* S_a2: one word must prefix the other.
                if len(b1) <= len(a2):
                    if a2[: len(b1)] != b1:
                        continue
                    key = (a1 + a2[len(b1):], b2)
                else:
                    if b1[: len(a2)] != a2:
                        continue
                    key = (a1, b2 + b1[len(a2):])
                check_word(self.n, key[0])
                check_word(self.n, key[1])
                total = data.get(key, ZERO) + c1 * c2
                if total:
                    data[key] = total
                else:
                    del data[key]
        return AlgebraElement(self.n, data)

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(
            self.n, {(b, a): c.conjugate() for (a, b), c in self._data.items()}
        )

    def power(self, m: int) -> "AlgebraElement":
        if m < 0:
            raise ValueError("negative powers are not defined here")
        out = AlgebraElement.one(self.n)
        for _ in range(m):
            out = out * self
        return out

    # ---- equality via grade-wise padding --------------------------------

    def _padded_table(self, targets: Dict[int, int]) -> Dict[TermKey, Coefficient]:
        """Refine each term until l(beta) reaches the target for its grade.

        Appending every length-d suffix to both words of a monomial leaves
        the element fixed; doing so per grade produces a canonical table
        comparable across elements.
        """
        table: Dict[TermKey, Coefficient] = {}
        letters = range(1, self.n + 1)
        for (alpha, beta), coeff in self._data.items():
            grade = len(alpha) - len(beta)
            depth = targets[grade] - len(beta)
            stack = [(alpha, beta, depth)]
            while stack:
                a, b, d = stack.pop()
                if d == 0:
                    total = table.get((a, b), ZERO) + coeff
                    if total:
                        table[(a, b)] = total
                    else:
                        del table[(a, b)]
                else:
                    for c in letters:
                        stack.append((a + (c,), b + (c,), d - 1))
        return table

    def _grade_targets(self, other: "AlgebraElement") -> Dict[int, int]:
        targets: Dict[int, int] = {}
        for element in (self, other):
            for alpha, beta in element._data:
                grade = len(alpha) - len(beta)
                level = len(beta)
                if targets.get(grade, -1) < level:
                    targets[grade] = level
        return targets

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AlgebraElement) or other.n != self.n:
            return NotImplemented if not isinstance(other, AlgebraElement) else False
        targets = self._grade_targets(other)
        return self._padded_table(targets) == other._padded_table(targets)

    __hash__ = None  # elements are comparable but not hashable

    # ---- canonical reduction -------------------------------------------

    def reduced(self) -> "AlgebraElement":
        """Minimal-support form: merge complete sibling families.

        Whenever all n refinements (alpha c, beta c), c = 1..n of a pair
        carry one common coefficient, they collapse to (alpha, beta).
        Merging repeats to a fixed point; the result is the unique shortest
        representation of the element.
        """
        data = dict(self._data)
        changed = True
        while changed:
            changed = False
            parents: Dict[TermKey, List[Coefficient]] = {}
            for (alpha, beta), coeff in data.items():
                if alpha and beta and alpha[-1] == beta[-1]:
                    parents.setdefault((alpha[:-1], beta[:-1]), []).append(coeff)
            for (pa, pb), coeffs in parents.items():
                if len(coeffs) != self.n or any(c != coeffs[0] for c in coeffs):
                    continue
                for c in range(1, self.n + 1):
                    del data[(pa + (c,), pb + (c,))]
                merged = data.get((pa, pb), ZERO) + coeffs[0]
                if merged:
                    data[(pa, pb)] = merged
                else:
                    data.pop((pa, pb), None)
                changed = True
        return AlgebraElement(self.n, data)

    # ---- conditional expectations ----------------------------------------

    def expect_core(self) -> "AlgebraElement":
        """Expectation onto the gauge-invariant core: keep grade-0 terms.

        Averaging the gauge action z . S_i = z S_i kills every monomial
        with l(alpha) != l(beta) and fixes the rest, and this recipe is
        representation independent because the expectation is linear.
        """
        return AlgebraElement(
            self.n,
            {k: c for k, c in self._data.items() if len(k[0]) == len(k[1])},
        )

    def expect_diagonal(self) -> "AlgebraElement":
        """Expectation onto the diagonal: keep terms with alpha == beta."""
        return AlgebraElement(
            self.n, {k: c for k, c in self._data.items() if k[0] == k[1]}
        )

    # ---- predicates ------------------------------------------------------

    def is_unitary(self) -> bool:
        one = AlgebraElement.one(self.n)
        return self * self.adjoint() == one and self.adjoint() * self == one

    def is_projection(self) -> bool:
        return self == self * self and self == self.adjoint()

    def __repr__(self) -> str:
        return f"AlgebraElement({self.n}, {format_element(self)!r})"

    def __str__(self) -> str:
        return format_element(self)


@dataclass(frozen=True)
class Classification:
    """Structural facts about an element, from its reduced form.

    sum_of_words    element is a sum of distinct monomials with coefficient 1
    core_level      minimal r with the element in the level-r matrix core
                    F_n^r (all words of length r), None if no grade-0 form
    diagonal_level  minimal r with the element in the level-r diagonal, or None
    gauge_invariant True when only grade 0 occurs
    """

    is_unitary: bool
    sum_of_words: bool
    core_level: Optional[int]
    diagonal_level: Optional[int]
    gauge_invariant: bool
    grades: Tuple[int, ...]


def classify(x: AlgebraElement) -> Classification:
    """Classify membership in the standard subalgebras of O_n."""
    reduced = x.reduced()
    grades = tuple(reduced.grades())
    sum_of_words = bool(reduced._data) and all(
        c == ONE for c in reduced._data.values()
    )
    gauge_invariant = grades in ((), (0,))
    core_level: Optional[int] = None
    diagonal_level: Optional[int] = None
    if gauge_invariant:
        core_level = max((len(a) for a, _ in reduced._data), default=0)
        if all(a == b for a, b in reduced._data):
            diagonal_level = core_level
    return Classification(
        is_unitary=x.is_unitary(),
        sum_of_words=sum_of_words,
        core_level=core_level,
        diagonal_level=diagonal_level,
        gauge_invariant=gauge_invariant,
        grades=grades,
    )


# ---- text format ---------------------------------------------------------


def format_element(x: AlgebraElement) -> str:
    """Canonical text rendering, e.g. '1*S(12)S*(21) + (-1/2)*S(1)S*(1)'.

    The reduced form is printed so equal elements render identically.
    """
    reduced = x.reduced()
    if reduced.is_zero():
        return "0"
    pieces = []
    for term, coeff in reduced.terms():
        if len(term.alpha) == 0 and len(term.beta) == 0:
            pieces.append(format_coefficient(coeff))
        else:
            pieces.append(f"{format_coefficient(coeff)}*{term}")
    return " + ".join(pieces)


_TOKEN = _re.compile(
    r"""\s*(?:
        (?P<siso>S\*\((?:\d+(?:,\d+)*)?\)|S\((?:\d+(?:,\d+)*)?\)|S\d+\*?)
      | (?P<scalar>\d+(?:/\d+)?i?|i)     # 3, 1/2, 2i, i (signs are operators)
      | (?P<plus>\+)
      | (?P<minus>-)
      | (?P<star>\*)
      | (?P<lparen>\()
      | (?P<rparen>\))
    )""",
    _re.VERBOSE,
)


def _tokenize(text: str) -> List[Tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == match.start():
            remainder = text[pos:].strip()
            if not remainder:
                break
            raise ValueError(f"cannot tokenize element text at: {remainder[:20]!r}")
        pos = match.end()
        for kind in ("siso", "scalar", "plus", "minus", "star", "lparen", "rparen"):
            value = match.group(kind)
            if value is not None:
                tokens.append((kind, value))
                break
    return tokens


def _scalar_value(text: str) -> Coefficient:
    if text.endswith("i"):
        body = text[:-1]
        if body in ("", "-"):
            body += "1"
        return Coefficient(Fraction(0), Fraction(body))
    return Coefficient(Fraction(text))


def _isometry_factor(n: int, token: str) -> AlgebraElement:
    starred = False
    body = token[1:]
    if body.startswith("*"):
        starred = True
        body = body[1:]
    if body.endswith("*"):
        starred = True
        body = body[:-1]
    if body.startswith("("):
        body = body[1:-1]
    letters = word_from_string(n, body)
    element = AlgebraElement.isometry(n, letters)
    return element.adjoint() if starred else element


class _Parser:
    """Recursive-descent parser for sums of products of S-factors.

    expr   := term (('+' | '-') term)*
    term   := factor (['*'] factor)*    (adjacency multiplies; '*' optional)
    factor := scalar | S-token | '-' factor | '(' expr ')'

    The adjoint star is part of the S-token (S*(21) or S21*), so a bare '*'
    is always multiplication. '-' is subtraction, or negation before a factor.
    """

    def __init__(self, n: int, tokens: List[Tuple[str, str]]):
        self.n = n
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Optional[Tuple[str, str]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> Tuple[str, str]:
        token = self.peek()
        if token is None:
            raise ValueError("unexpected end of element text")
        self.pos += 1
        return token

    def parse(self) -> AlgebraElement:
        value = self.expr()
        if self.peek() is not None:
            raise ValueError(f"trailing tokens in element text: {self.peek()!r}")
        return value

    def expr(self) -> AlgebraElement:
        value = self.term()
        while True:
            token = self.peek()
            if token and token[0] == "plus":
                self.take()
                value = value + self.term()
            elif token and token[0] == "minus":
                self.take()
                value = value - self.term()
            else:
                return value

    def term(self) -> AlgebraElement:
        value = self.factor()
        while True:
            token = self.peek()
            if token and token[0] == "star":
                self.take()
                value = value * self.factor()
            elif token and token[0] in ("siso", "scalar", "lparen"):
                value = value * self.factor()
            else:
                return value

    def factor(self) -> AlgebraElement:
        kind, text = self.take()
        if kind == "scalar":
            return AlgebraElement.scalar(self.n, _scalar_value(text))
        if kind == "siso":
            return _isometry_factor(self.n, text)
        if kind == "minus":
            return -self.factor()
        if kind == "lparen":
            value = self.expr()
            kind2, _ = self.take()
            if kind2 != "rparen":
                raise ValueError("unbalanced parentheses in element text")
            return value
        raise ValueError(f"unexpected token {text!r}")


def parse_element(n: int, text: str) -> AlgebraElement:
    """Parse an element expression over O_n.

    Accepts both the printed format (1*S(12)S*(21) + (-1/2)*S(1)S*(1),
    where '*' after a coefficient is ordinary multiplication) and the terse
    form S12 S21* with whitespace products. '0' parses to the zero element.
    """
    check_alphabet(n)
    stripped = text.strip()
    if stripped == "0":
        return AlgebraElement.zero(n)
    return _Parser(n, _tokenize(stripped)).parse()


# ---- JSON format ---------------------------------------------------------


def element_to_json(x: AlgebraElement) -> str:
    """Serialize as JSON with exact p/q coefficient strings."""
    reduced = x.reduced()
    terms = [
        {
            "alpha": word_to_string(alpha),
            "beta": word_to_string(beta),
            "re": str(reduced._data[(alpha, beta)].re),
            "im": str(reduced._data[(alpha, beta)].im),
        }
        for alpha, beta in sorted(
            reduced._data, key=lambda k: (len(k[0]), k[0], len(k[1]), k[1])
        )
    ]
    return json.dumps({"schema": 1, "n": reduced.n, "terms": terms}, indent=2)


def element_from_json(text: str) -> AlgebraElement:
    payload = json.loads(text)
    if payload.get("schema") != 1:
        raise ValueError(f"unsupported element schema: {payload.get('schema')!r}")
    n = payload["n"]
    check_alphabet(n)
    data: Dict[TermKey, Coefficient] = {}
    for term in payload["terms"]:
        key = (word_from_string(n, term["alpha"]), word_from_string(n, term["beta"]))
        coeff = Coefficient(Fraction(term["re"]), Fraction(term["im"]))
        if key in data:
            raise ValueError(f"duplicate term {key} in element JSON")
        if coeff:
            data[key] = coeff
    return AlgebraElement(n, data)
