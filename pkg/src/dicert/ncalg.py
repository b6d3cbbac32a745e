"""Noncommutative polynomials over measurement projectors and adversary operators.

Three kinds of letters appear in the relaxations built by :mod:`dicert.certify`:

* Alice's projectors ``M[a|x]`` (party ``"A"``),
* Bob's projectors ``N[b|y]`` (party ``"B"``),
* adversary operators ``Z[a,b;i]`` and their adjoints (party ``"E"``).

Letters of different parties commute; projectors of one party obey
``P**2 = P`` and ``M[0|x] M[1|x] = 0``.  Adversary letters obey no relation
among themselves.  Canonical words therefore list the A-letters, then the
B-letters, then the E-letters, each group in its original relative order and
with projector products reduced.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "Letter",
    "Monomial",
    "Polynomial",
    "MomentMatrixSpec",
    "BasisTooSmallError",
    "IDENTITY",
    "ZERO",
    "proj_a",
    "proj_b",
    "zop",
    "canonicalize",
    "adjoint",
    "generate_basis",
    "build_moment_matrix",
    "polynomial_to_functional",
    "correlator_polynomial",
    "spec_to_json",
]

_PARTY_RANK = {"A": 0, "B": 1, "E": 2}


@dataclass(frozen=True)
class Letter:
    """A single operator symbol.

    For parties ``A``/``B`` ``index`` is ``(setting, outcome)``; for ``E`` it is
    ``(a, b, node)``.  ``dagger`` is only meaningful for ``E`` letters.
    """

    party: str
    index: tuple[int, ...]
    dagger: bool = False

    def __post_init__(self) -> None:
        if self.party not in _PARTY_RANK:
            raise ValueError(f"unknown party {self.party!r}")
        if self.party != "E" and self.dagger:
            raise ValueError("projector letters are self-adjoint")

    @property
    def is_projector(self) -> bool:
        return self.party != "E"

    def adjoint(self) -> Letter:
        if self.is_projector:
            return self
        return Letter("E", self.index, not self.dagger)

    def sort_key(self) -> tuple:
        return (_PARTY_RANK[self.party], self.index, self.dagger)

    def __str__(self) -> str:
        if self.party == "A":
            x, a = self.index
            return f"M{a}|{x}"
        if self.party == "B":
            y, b = self.index
            return f"N{b}|{y}"
        a, b, i = self.index
        return f"Z{a}{b}_{i}" + ("*" if self.dagger else "")


def proj_a(x: int, a: int = 0) -> Letter:
    """Alice's projector for outcome ``a`` of setting ``x``."""
    return Letter("A", (x, a))


def proj_b(y: int, b: int = 0) -> Letter:
    """Bob's projector for outcome ``b`` of setting ``y``."""
    return Letter("B", (y, b))


def zop(a: int, b: int, node: int, dagger: bool = False) -> Letter:
    """Adversary operator attached to outcome pair ``(a, b)`` and quadrature node."""
    return Letter("E", (a, b, node), dagger)


@dataclass(frozen=True)
class Monomial:
    """A word of letters; ``zero=True`` marks the vanishing word."""

    word: tuple[Letter, ...] = ()
    zero: bool = False

    @classmethod
    def of(cls, *letters: Letter) -> Monomial:
        return canonicalize(cls(tuple(letters)))

    def __mul__(self, other: Monomial) -> Monomial:
        if self.zero or other.zero:
            return ZERO
        return canonicalize(Monomial(self.word + other.word))

    def __len__(self) -> int:
        return len(self.word)

    def sort_key(self) -> tuple:
        if self.zero:
            return (-1, ())
        return (len(self.word), tuple(l.sort_key() for l in self.word))

    def __lt__(self, other: Monomial) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if self.zero:
            return "0"
        if not self.word:
            return "1"
        return " ".join(str(l) for l in self.word)

    __repr__ = __str__


IDENTITY = Monomial(())
ZERO = Monomial((), zero=True)


def _reduce_projectors(run: list[Letter]) -> list[Letter] | None:
    out: list[Letter] = []
    for letter in run:
        if out and out[-1].index[0] == letter.index[0]:
            if out[-1].index[1] == letter.index[1]:
                continue
            return None
        out.append(letter)
    return out


def canonicalize(m: Monomial) -> Monomial:
    """Return the normal form of ``m`` (possibly :data:`ZERO`)."""
    if m.zero:
        return ZERO
    groups: dict[str, list[Letter]] = {"A": [], "B": [], "E": []}
    for letter in m.word:
        groups[letter.party].append(letter)
    word: list[Letter] = []
    for party in ("A", "B"):
        reduced = _reduce_projectors(groups[party])
        if reduced is None:
            return ZERO
        word.extend(reduced)
    word.extend(groups["E"])
    return Monomial(tuple(word))


def adjoint(m: Monomial) -> Monomial:
    """Reverse the word and conjugate every letter."""
    if m.zero:
        return ZERO
    return canonicalize(Monomial(tuple(l.adjoint() for l in reversed(m.word))))


class Polynomial:
    """Finite complex linear combination of canonical monomials."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, complex] | None = None):
        self.terms: dict[Monomial, complex] = {}
        for mono, coeff in (terms or {}).items():
            self._add(canonicalize(mono), coeff)

    def _add(self, mono: Monomial, coeff: complex) -> None:
        if mono.zero or coeff == 0:
            return
        value = self.terms.get(mono, 0) + coeff
        if value == 0:
            self.terms.pop(mono, None)
        else:
            self.terms[mono] = value

    @classmethod
    def constant(cls, value: complex) -> Polynomial:
        return cls({IDENTITY: value})

    @classmethod
    def of(cls, *letters: Letter) -> Polynomial:
        return cls({Monomial(tuple(letters)): 1.0})

    @staticmethod
    def _coerce(other) -> Polynomial:
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, Monomial):
            return Polynomial({other: 1.0})
        if isinstance(other, Letter):
            return Polynomial.of(other)
        return Polynomial.constant(complex(other))

    def __add__(self, other) -> Polynomial:
        other = self._coerce(other)
        out = Polynomial()
        out.terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            out._add(mono, coeff)
        return out

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        out = Polynomial()
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other) -> Polynomial:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> Polynomial:
        return self._coerce(other) - self

    def __mul__(self, other) -> Polynomial:
        if isinstance(other, (int, float, complex, np.number)):
            out = Polynomial()
            if other != 0:
                out.terms = {m: c * other for m, c in self.terms.items()}
            return out
        other = self._coerce(other)
        out = Polynomial()
        for (m1, c1), (m2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            out._add(m1 * m2, c1 * c2)
        return out

    def __rmul__(self, other) -> Polynomial:
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return self._coerce(other) * self

    def adjoint(self) -> Polynomial:
        out = Polynomial()
        for mono, coeff in self.terms.items():
            out._add(adjoint(mono), np.conj(coeff))
        return out

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        diff = self - self.adjoint()
        return all(abs(c) <= tol for c in diff.terms.values())

    def expand_outcomes(self) -> Polynomial:
        """Rewrite every outcome-1 projector as ``1 - P[0]``."""
        out = Polynomial()
        for mono, coeff in self.terms.items():
            term = Polynomial.constant(coeff)
            for letter in mono.word:
                if letter.is_projector and letter.index[1] == 1:
                    zero_letter = Letter(letter.party, (letter.index[0], 0))
                    factor = Polynomial.constant(1.0) - Polynomial.of(zero_letter)
                else:
                    factor = Polynomial.of(letter)
                term = term * factor
            out = out + term
        return out

    def __repr__(self) -> str:
        if not self.terms:
            return "Polynomial(0)"
        parts = [f"{c:+g}*{m}" for m, c in sorted(self.terms.items(), key=lambda t: t[0].sort_key())]
        return "Polynomial(" + " ".join(parts) + ")"


def correlator_polynomial(x: int, y: int) -> Polynomial:
    """The observable ``A_x B_y`` with ``A_x = 2 M[0|x] - 1``, ``B_y = 2 N[0|y] - 1``."""
    ax = 2 * Polynomial.of(proj_a(x)) - 1
    by = 2 * Polynomial.of(proj_b(y)) - 1
    return ax * by


def generate_basis(
    level: int,
    n_settings_a: int = 2,
    n_settings_b: int = 2,
    extras: Iterable[Monomial] = (),
) -> list[Monomial]:
    """NPA basis of all canonical words of length ``<= level`` plus ``extras``.

    Only the outcome-0 projector of each setting is used as a letter; the
    outcome-1 projector is the complement.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    letters = [proj_a(x) for x in range(n_settings_a)] + [proj_b(y) for y in range(n_settings_b)]
    seen: dict[Monomial, None] = {IDENTITY: None}
    for length in range(1, level + 1):
        for word in itertools.product(letters, repeat=length):
            mono = canonicalize(Monomial(word))
            if not mono.zero and len(mono) == length:
                seen.setdefault(mono, None)
    for extra in extras:
        mono = canonicalize(extra)
        if not mono.zero:
            seen.setdefault(mono, None)
    return list(seen)


class BasisTooSmallError(KeyError):
    """A polynomial references a word absent from the moment table."""

    def __init__(self, word: Monomial):
        super().__init__(f"basis too small: moment of '{word}' is not in the moment matrix")
        self.word = word


@dataclass
class MomentMatrixSpec:
    """Symbolic moment matrix ``G[u, v] = <u^dagger v>`` over ``basis``.

    ``entries`` holds variable ids: ``0`` is the identity (pinned to one in
    normalized relaxations) and ``-1`` marks an entry that vanishes
    identically.  With ``hermitian_moments`` a word and its adjoint share one
    real variable and the matrix is real symmetric; otherwise ``conj`` maps
    each id to the id of the adjoint word.
    """

    basis: list[Monomial]
    words: list[Monomial]
    var_of: dict[Monomial, int]
    conj: list[int]
    entries: np.ndarray
    hermitian_moments: bool

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def n_vars(self) -> int:
        return len(self.words)

    def lookup(self, word: Monomial) -> int:
        word = canonicalize(word)
        if word.zero:
            return -1
        if self.hermitian_moments:
            word = min(word, adjoint(word))
        try:
            return self.var_of[word]
        except KeyError:
            raise BasisTooSmallError(word) from None

    def evaluate(self, moments: np.ndarray) -> np.ndarray:
        """Fill the matrix from a vector of moment values indexed by id."""
        values = np.concatenate([np.asarray(moments), [0.0]])
        return values[self.entries]


def build_moment_matrix(basis: list[Monomial], hermitian_moments: bool = True) -> MomentMatrixSpec:
    if not basis or basis[0] != IDENTITY:
        raise ValueError("basis must start with the identity monomial")
    if len(set(basis)) != len(basis):
        raise ValueError("basis contains duplicates")
    n = len(basis)
    words: list[Monomial] = [IDENTITY]
    var_of: dict[Monomial, int] = {IDENTITY: 0}
    entries = np.empty((n, n), dtype=np.int64)
    adjoints = [adjoint(u) for u in basis]
    for i in range(n):
        for j in range(n):
            word = adjoints[i] * basis[j]
            if word.zero:
                entries[i, j] = -1
                continue
            if hermitian_moments:
                word = min(word, adjoint(word))
            var = var_of.get(word)
            if var is None:
                var = len(words)
                var_of[word] = var
                words.append(word)
            entries[i, j] = var
    if hermitian_moments:
        conj = list(range(len(words)))
    else:
        conj = []
        for word in words:
            conj.append(var_of.get(adjoint(word), -1))
        # the adjoint of every entry is itself an entry (transpose position)
        assert min(conj) >= 0
    return MomentMatrixSpec(basis, words, var_of, conj, entries, hermitian_moments)


def polynomial_to_functional(p: Polynomial, spec: MomentMatrixSpec) -> tuple[complex, dict[int, complex]]:
    """Map ``p`` to ``(constant, {var_id: coeff})`` so that ``<p> = const + sum coeff * var``.

    The identity moment is returned as the constant term.  Outcome-1
    projectors are expanded first; a word outside the moment table raises
    :class:`BasisTooSmallError`.
    """
    const = 0j
    coeffs: dict[int, complex] = {}
    for mono, coeff in p.expand_outcomes().terms.items():
        var = spec.lookup(mono)
        if var == 0:
            const += coeff
        elif var > 0:
            coeffs[var] = coeffs.get(var, 0) + coeff
    return const, {k: v for k, v in coeffs.items() if v != 0}


def spec_to_json(spec: MomentMatrixSpec) -> dict:
    """Debug dump for cross-tool comparison."""
    n = spec.size
    entries = []
    for i in range(n):
        for j in range(n):
            var = int(spec.entries[i, j])
            # constants: identity moment is 1, vanishing products are 0
            value: int | str = "0" if var < 0 else ("1" if var == 0 else var)
            entries.append((i, j, value))
    return {
        "basis": [str(m) for m in spec.basis],
        "variables": [str(w) for w in spec.words],
        "entries": entries,
        "hermitian_moments": spec.hermitian_moments,
    }
