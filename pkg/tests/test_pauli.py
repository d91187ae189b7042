import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqng.pauli import (
    HamiltonianFormatError,
    Observable,
    PauliWord,
    example1_hamiltonian,
    expectation,
    format_hamiltonian,
    heisenberg_hamiltonian,
    parse_hamiltonian,
    pauli_matrix,
    term_expectations,
    to_dense,
)

_P = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def kron_word(letters):
    return reduce(np.kron, [_P[c] for c in letters])


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


words = st.integers(1, 5).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))


@given(words, st.integers(0, 2**32 - 1))
def test_word_action_matches_kron(letters, seed):
    rng = np.random.default_rng(seed)
    v = random_state(rng, len(letters))
    np.testing.assert_allclose(PauliWord(letters).apply(v), kron_word(letters) @ v, atol=1e-12)
    np.testing.assert_allclose(pauli_matrix(letters), kron_word(letters), atol=0)


def test_zz_on_bell_state():
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert expectation(Observable.from_terms([(1.0, "ZZ")], 2), bell) == pytest.approx(1.0)


def test_x_on_zero_is_zero():
    assert expectation(Observable.from_terms([(1.0, "X")], 1), np.array([1.0, 0])) == 0.0


def test_example1_on_zero_state():
    # h <ZI + IZ> = 2h on |00>
    assert expectation(example1_hamiltonian(), np.array([1.0, 0, 0, 0])) == pytest.approx(0.8)


def test_big_endian_ordering():
    # Z on qubit 0 acts on the most significant bit
    state = np.zeros(4)
    state[0b10] = 1.0
    assert expectation(Observable.from_terms([(1.0, "ZI")], 2), state) == -1.0
    assert expectation(Observable.from_terms([(1.0, "IZ")], 2), state) == 1.0


def test_duplicates_merge_and_cancel():
    obs = Observable.from_terms([(0.5, "XZ"), (0.25, "XZ"), (1.0, "YY"), (-1.0, "YY")], 2)
    assert [(c, w.letters) for c, w in obs.terms] == [(0.75, "XZ")]


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_expectation_is_real_and_matches_dense(seed, n):
    rng = np.random.default_rng(seed)
    terms = [(float(rng.normal()), "".join(rng.choice(list("IXYZ"), n))) for _ in range(5)]
    obs = Observable.from_terms(terms, n)
    v = random_state(rng, n)
    dense = sum(c * kron_word(w) for c, w in terms)
    assert expectation(obs, v) == pytest.approx(float(np.real(v.conj() @ dense @ v)), abs=1e-12)
    np.testing.assert_allclose(to_dense(obs), dense, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_expectation_linear_in_coefficients(seed):
    rng = np.random.default_rng(seed)
    v = random_state(rng, 3)
    a = Observable.from_terms([(1.3, "XYZ"), (0.2, "ZZI")], 3)
    b = Observable.from_terms([(-0.7, "XYZ"), (0.9, "IIX")], 3)
    lhs = expectation(2.0 * a + b, v)
    assert lhs == pytest.approx(2 * expectation(a, v) + expectation(b, v), abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_term_expectations_bounded(seed):
    rng = np.random.default_rng(seed)
    obs = heisenberg_hamiltonian(3)
    vals = term_expectations(obs, random_state(rng, 3))
    assert np.all(np.abs(vals) <= 1 + 1e-12)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        expectation(example1_hamiltonian(), np.ones(8) / math.sqrt(8))


def test_unnormalized_state_rejected():
    with pytest.raises(ValueError):
        expectation(example1_hamiltonian(), np.array([1.0, 1.0, 0, 0]))


def test_bad_letter_and_length():
    with pytest.raises(ValueError):
        PauliWord("XQ")
    with pytest.raises(ValueError):
        Observable.from_terms([(1.0, "XXX")], 2)


def test_dense_limit():
    with pytest.raises(ValueError):
        to_dense(heisenberg_hamiltonian(4), dense_limit=3)


def test_parse_roundtrip():
    obs = heisenberg_hamiltonian(3, J=-0.5, h=0.25)
    back = parse_hamiltonian(format_hamiltonian(obs))
    assert back == obs


def test_parse_comments_and_case():
    text = "# model\nqubits: 2\n0.4 zi  # field\n0.4 IZ\n\n0.2 XX\n"
    assert parse_hamiltonian(text) == example1_hamiltonian()


@pytest.mark.parametrize(
    "text, line",
    [
        ("qubits: 2\n0.4 ZIZ\n", 2),
        ("qubits: 2\nabc ZI\n", 2),
        ("qubits: 2\n0.4 ZI\n0.1 QQ\n", 3),
        ("0.4 ZI\n", 1),
        ("qubits: 2\n0.4\n", 2),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(HamiltonianFormatError) as info:
        parse_hamiltonian(text)
    assert info.value.line == line


def test_parse_empty():
    with pytest.raises(HamiltonianFormatError):
        parse_hamiltonian("qubits: 2\n")
    with pytest.raises(HamiltonianFormatError):
        parse_hamiltonian("")


def test_heisenberg_term_count():
    obs = heisenberg_hamiltonian(5)
    assert len(obs) == 3 * 4 + 5
    assert np.all(obs.coefficients == -1.0)
