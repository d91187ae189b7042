"""Pauli words, weighted Pauli observables and the Hamiltonian text format.

Qubit ordering is big-endian throughout the package: the leftmost letter of a
word acts on qubit 0, which is the most significant bit of a basis index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

DENSE_LIMIT = 14
IMAG_TOL = 1e-10
NORM_TOL = 1e-10
DROP_TOL = 1e-15

_LETTERS = frozenset("IXYZ")


class HamiltonianFormatError(ValueError):
    """Raised when Hamiltonian text cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class PauliWord:
    letters: str

    def __post_init__(self):
        if not isinstance(self.letters, str):
            object.__setattr__(self, "letters", "".join(self.letters))
        if not self.letters:
            raise ValueError("Pauli word must act on at least one qubit")
        bad = set(self.letters) - _LETTERS
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.letters

    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Return P|vec> without building the 2^n x 2^n matrix."""
        if vec.shape[0] != 1 << self.n_qubits:
            raise ValueError(
                f"vector of length {vec.shape[0]} does not match {self.n_qubits}-qubit word"
            )
        flip, phase = _action(self.letters)
        out = np.empty_like(vec, dtype=complex)
        out[np.arange(vec.shape[0]) ^ flip] = phase * vec
        return out

    def expectation(self, vec: np.ndarray) -> complex:
        return np.vdot(vec, self.apply(vec))


@lru_cache(maxsize=4096)
def _action(letters: str) -> tuple[int, np.ndarray]:
    # P|b> = phase[b] |b ^ flip>
    n = len(letters)
    flip = 0
    zmask = 0
    n_y = 0
    for q, ch in enumerate(letters):
        bit = 1 << (n - 1 - q)
        if ch in "XY":
            flip |= bit
        if ch in "YZ":
            zmask |= bit
        if ch == "Y":
            n_y += 1
    idx = np.arange(1 << n, dtype=np.int64)
    parity = _popcount(idx & zmask) & 1
    phase = (1j**n_y) * np.where(parity == 1, -1.0, 1.0)
    phase.setflags(write=False)
    return flip, phase


def _popcount(arr: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(arr)
    count = np.zeros_like(arr)
    work = arr.copy()
    while np.any(work):
        count += work & 1
        work >>= 1
    return count


@dataclass(frozen=True)
class Observable:
    """Real-weighted sum of Pauli words on ``n_qubits`` qubits.

    Build with :meth:`from_terms` so duplicate words are merged; the raw
    constructor assumes ``terms`` are already merged and validated.
    """

    terms: tuple[tuple[float, PauliWord], ...]
    n_qubits: int

    @classmethod
    def from_terms(
        cls, terms: Iterable[tuple[float, PauliWord | str]], n_qubits: int | None = None
    ) -> "Observable":
        merged: dict[str, float] = {}
        order: list[str] = []
        for coeff, word in terms:
            word = word if isinstance(word, PauliWord) else PauliWord(word)
            if n_qubits is None:
                n_qubits = word.n_qubits
            if word.n_qubits != n_qubits:
                raise ValueError(
                    f"word {word.letters!r} has length {word.n_qubits}, expected {n_qubits}"
                )
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ValueError(f"non-finite coefficient {coeff} for {word.letters!r}")
            if word.letters not in merged:
                order.append(word.letters)
                merged[word.letters] = 0.0
            merged[word.letters] += coeff
        if n_qubits is None or n_qubits < 1:
            raise ValueError("observable needs a positive qubit count")
        kept = tuple(
            (merged[w], PauliWord(w)) for w in order if abs(merged[w]) >= DROP_TOL
        )
        return cls(kept, n_qubits)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "Observable") -> "Observable":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        return Observable.from_terms(self.terms + other.terms, self.n_qubits)

    def __mul__(self, scalar: float) -> "Observable":
        return Observable.from_terms(
            ((scalar * c, w) for c, w in self.terms), self.n_qubits
        )

    __rmul__ = __mul__

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms])

    def __str__(self) -> str:
        return format_hamiltonian(self)


def expectation(obs: Observable, state) -> float:
    """Exact <psi|O|psi> for a normalized state (``State`` or raw amplitudes)."""
    vec = _amplitudes(state)
    _check_dims(obs, vec)
    norm = float(np.vdot(vec, vec).real)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
    return _expectation_unchecked(obs, vec)


def term_expectations(obs: Observable, state) -> np.ndarray:
    """Per-term <P_k> values, real parts only."""
    vec = _amplitudes(state)
    _check_dims(obs, vec)
    out = np.empty(len(obs.terms))
    for k, (_, word) in enumerate(obs.terms):
        val = word.expectation(vec)
        if abs(val.imag) > IMAG_TOL:
            raise ArithmeticError(f"<{word}> has imaginary part {val.imag:.3e}")
        out[k] = val.real
    return out


def _expectation_unchecked(obs: Observable, vec: np.ndarray) -> float:
    total = 0.0 + 0.0j
    for coeff, word in obs.terms:
        total += coeff * word.expectation(vec)
    if abs(total.imag) > IMAG_TOL:
        raise ArithmeticError(f"expectation has imaginary residue {total.imag:.3e}")
    return float(total.real)


def _amplitudes(state) -> np.ndarray:
    return np.asarray(getattr(state, "amplitudes", state))


def _check_dims(obs: Observable, vec: np.ndarray) -> None:
    if vec.ndim != 1 or vec.shape[0] != 1 << obs.n_qubits:
        raise ValueError(
            f"state of length {vec.shape[0]} does not match {obs.n_qubits}-qubit observable"
        )


_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(word: PauliWord | str) -> np.ndarray:
    letters = word.letters if isinstance(word, PauliWord) else word
    mat = np.ones((1, 1), dtype=complex)
    for ch in letters:
        mat = np.kron(mat, _SINGLE[ch])
    return mat


def to_dense(obs: Observable, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    if obs.n_qubits > dense_limit:
        raise ValueError(
            f"{obs.n_qubits} qubits exceeds the dense limit of {dense_limit}"
        )
    dim = 1 << obs.n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for coeff, word in obs.terms:
        flip, phase = _action(word.letters)
        mat[cols ^ flip, cols] += coeff * phase
    return mat


def parse_hamiltonian(text: str) -> Observable:
    """Parse the ``qubits: n`` / ``coeff WORD`` text format."""
    n_qubits = None
    terms: list[tuple[float, PauliWord]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n_qubits is None:
            key, sep, value = line.partition(":")
            if not sep or key.strip().lower() != "qubits":
                raise HamiltonianFormatError("expected header 'qubits: <n>'", lineno)
            try:
                n_qubits = int(value.strip())
            except ValueError:
                raise HamiltonianFormatError(f"bad qubit count {value.strip()!r}", lineno)
            if n_qubits < 1:
                raise HamiltonianFormatError("qubit count must be positive", lineno)
            continue
        fields = line.split()
        if len(fields) != 2:
            raise HamiltonianFormatError(f"expected '<coeff> <word>', got {line!r}", lineno)
        try:
            coeff = float(fields[0])
        except ValueError:
            raise HamiltonianFormatError(f"bad coefficient {fields[0]!r}", lineno)
        if not math.isfinite(coeff):
            raise HamiltonianFormatError(f"non-finite coefficient {fields[0]!r}", lineno)
        letters = fields[1].upper()
        if len(letters) != n_qubits:
            raise HamiltonianFormatError(
                f"word {fields[1]!r} has length {len(letters)}, expected {n_qubits}", lineno
            )
        try:
            terms.append((coeff, PauliWord(letters)))
        except ValueError as exc:
            raise HamiltonianFormatError(str(exc), lineno)
    if n_qubits is None:
        raise HamiltonianFormatError("missing 'qubits: <n>' header")
    if not terms:
        raise HamiltonianFormatError("no Hamiltonian terms")
    obs = Observable.from_terms(terms, n_qubits)
    if not obs.terms:
        raise HamiltonianFormatError("all terms cancel after merging")
    return obs


def format_hamiltonian(obs: Observable) -> str:
    lines = [f"qubits: {obs.n_qubits}"]
    lines += [f"{coeff!r} {word.letters}" for coeff, word in obs.terms]
    return "\n".join(lines) + "\n"


def load_hamiltonian(path) -> Observable:
    with open(path, encoding="utf-8") as fh:
        return parse_hamiltonian(fh.read())


def single_site(n: int, site: int, letter: str) -> PauliWord:
    letters = ["I"] * n
    letters[site] = letter
    return PauliWord("".join(letters))


def two_site(n: int, a: int, b: int, la: str, lb: str) -> PauliWord:
    letters = ["I"] * n
    letters[a] = la
    letters[b] = lb
    return PauliWord("".join(letters))


def example1_hamiltonian(h: float = 0.4, J: float = 0.2) -> Observable:
    """Two-qubit ``h (ZI + IZ) + J XX`` model."""
    return Observable.from_terms([(h, "ZI"), (h, "IZ"), (J, "XX")], 2)


def heisenberg_hamiltonian(n: int, J: float = -1.0, h: float = -1.0) -> Observable:
    """Open-boundary chain ``J sum (XX + YY + ZZ) + h sum X``."""
    if n < 2:
        raise ValueError("Heisenberg chain needs at least 2 qubits")
    terms: list[tuple[float, PauliWord]] = []
    for i in range(n - 1):
        for p in "XYZ":
            terms.append((J, two_site(n, i, i + 1, p, p)))
    for i in range(n):
        terms.append((h, single_site(n, i, "X")))
    return Observable.from_terms(terms, n)


def random_observable(
    rng: np.random.Generator, n_qubits: int, n_terms: int, letters: Sequence[str] = "IXYZ"
) -> Observable:
    words = ["".join(rng.choice(list(letters), size=n_qubits)) for _ in range(n_terms)]
    coeffs = rng.normal(size=n_terms)
    return Observable.from_terms(zip(coeffs, words), n_qubits)
