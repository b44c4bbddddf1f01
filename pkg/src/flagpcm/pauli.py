"""Signed multi-qubit Pauli strings.

Letters are stored per qubit, index 0 first. The phase is kept as a power
of ``i`` so products and conjugations stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

LETTERS = "IXYZ"

# single-qubit products: (a, b) -> (phase power of i, letter) with a*b = i^k c
_PRODUCT = {
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("X", "X"): (0, "I"), ("X", "Y"): (1, "Z"), ("X", "Z"): (3, "Y"),
    ("Y", "I"): (0, "Y"), ("Y", "X"): (3, "Z"), ("Y", "Y"): (0, "I"), ("Y", "Z"): (1, "X"),
    ("Z", "I"): (0, "Z"), ("Z", "X"): (1, "Y"), ("Z", "Y"): (3, "X"), ("Z", "Z"): (0, "I"),
}

_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}

MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def anticommutes(a: str, b: str) -> bool:
    """True when two single-qubit letters anticommute."""
    return a != "I" and b != "I" and a != b


@dataclass(frozen=True)
class PauliString:
    letters: str
    power: int = 0  # overall phase is i**power

    def __post_init__(self):
        if any(c not in LETTERS for c in self.letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        object.__setattr__(self, "power", self.power % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls("I" * n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, sign: int = 1) -> "PauliString":
        if not 0 <= qubit < n:
            raise IndexError(f"qubit {qubit} out of range for {n} qubits")
        letters = ["I"] * n
        letters[qubit] = letter
        return cls("".join(letters), 0 if sign > 0 else 2)

    @classmethod
    def from_map(cls, n: int, terms: Mapping[int, str], sign: int = 1) -> "PauliString":
        letters = ["I"] * n
        for q, c in terms.items():
            letters[q] = c
        return cls("".join(letters), 0 if sign > 0 else 2)

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse ``'+XIZ'``, ``'-iYY'`` or a bare ``'XZ'``."""
        text = text.strip()
        for prefix, power in (("+i", 1), ("-i", 3), ("+", 0), ("-", 2), ("i", 1)):
            if text.startswith(prefix) and len(text) > len(prefix):
                return cls(text[len(prefix):], power)
        return cls(text)

    @property
    def num_qubits(self) -> int:
        return len(self.letters)

    @property
    def phase(self) -> complex:
        return (1, 1j, -1, -1j)[self.power]

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian strings."""
        if self.power % 2:
            raise ValueError(f"{self} has an imaginary phase")
        return 1 if self.power == 0 else -1

    @property
    def is_hermitian(self) -> bool:
        return self.power % 2 == 0

    def support(self) -> list[int]:
        return [q for q, c in enumerate(self.letters) if c != "I"]

    def weight(self) -> int:
        return len(self.support())

    def __getitem__(self, qubit: int) -> str:
        return self.letters[qubit]

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.num_qubits != other.num_qubits:
            raise ValueError("register size mismatch")
        power = self.power + other.power
        out = []
        for a, b in zip(self.letters, other.letters):
            k, c = _PRODUCT[(a, b)]
            power += k
            out.append(c)
        return PauliString("".join(out), power)

    def __neg__(self) -> "PauliString":
        return PauliString(self.letters, self.power + 2)

    def times_phase(self, power: int) -> "PauliString":
        return PauliString(self.letters, self.power + power)

    def unsigned(self) -> "PauliString":
        return PauliString(self.letters)

    def commutes_with(self, other: "PauliString") -> bool:
        n_anti = sum(anticommutes(a, b) for a, b in zip(self.letters, other.letters))
        return n_anti % 2 == 0

    def restricted(self, qubits: Iterable[int]) -> "PauliString":
        """Keep only the listed qubits' letters (phase dropped)."""
        keep = set(qubits)
        return PauliString("".join(c if q in keep else "I" for q, c in enumerate(self.letters)))

    def matrix(self) -> np.ndarray:
        """Dense matrix with qubit 0 as the least-significant bit."""
        m = np.array([[1.0 + 0j]])
        for c in reversed(self.letters):
            m = np.kron(m, MATRICES[c])
        return self.phase * m

    def __str__(self) -> str:
        return _PHASE_TEXT[self.power] + self.letters

    def label(self, names: Iterable[str] | None = None) -> str:
        """Sparse rendering such as ``-X_d3 X_s``."""
        names = list(names) if names is not None else [str(q) for q in range(self.num_qubits)]
        body = " ".join(f"{c}_{names[q]}" for q, c in enumerate(self.letters) if c != "I")
        return (_PHASE_TEXT[self.power] if self.power else "") + (body or "I")
