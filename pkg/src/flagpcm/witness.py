"""Stabilizer generators and the GME witness W_n = l_n - (1/n) sum <g_i>."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .circuits import ShotTallies
from .pauli import PauliString
from .sim import QUBIT_NAMES, S

NUM_QUBITS = 6
# signed generator sets, letters ordered d1 d2 d3 d4 s f
_G4 = ("+XXIIII", "-IXXIII", "+IIXXII", "+ZZZZII")
_G6 = ("-IIXIXI", "-IIIXXI", "-XIIIXX", "-IXIIXX", "+ZZIIIY", "+ZZZZZI")


class WitnessError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSet:
    n: int
    generators: tuple[PauliString, ...]
    # generator index -> qubit whose X outcome multiplies that generator's sign
    conditional_sign: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.generators) != self.n:
            raise WitnessError(f"expected {self.n} generators, got {len(self.generators)}")

    @property
    def bound(self) -> float:
        return (self.n - 1) / self.n

    def mutually_commute(self) -> bool:
        g = self.generators
        return all(g[a].commutes_with(g[b]) for a in range(len(g)) for b in range(a))

    def labels(self) -> list[str]:
        out = []
        for k, g in enumerate(self.generators):
            text = g.label(QUBIT_NAMES)
            if k in self.conditional_sign:
                text = "±" + text.lstrip("+")
            out.append(text)
        return out

    def readout_pauli(self, k: int) -> PauliString:
        """The generator as an outcome product, conditional sign qubits included."""
        g = self.generators[k]
        q = self.conditional_sign.get(k)
        if q is None:
            return g
        return g * PauliString.single(g.num_qubits, q, "X")


def generator_set(n: int) -> GeneratorSet:
    if n == 4:
        return GeneratorSet(4, tuple(PauliString.parse(t) for t in _G4), {3: S})
    if n == 6:
        return GeneratorSet(6, tuple(PauliString.parse(t) for t in _G6))
    raise WitnessError(f"no generator set for n={n}; expected 4 or 6")


def measurement_setting(g: PauliString) -> tuple[str, ...]:
    return tuple(c if c != "I" else "Z" for c in g.letters)


def witness_settings(gset: GeneratorSet) -> list[tuple[str, ...]]:
    """Distinct settings covering the set; n=4 merges X-type generators and reads s in X."""
    settings: list[tuple[str, ...]] = []
    for k in range(gset.n):
        g = gset.readout_pauli(k)
        b = list(measurement_setting(g))
        if gset.n == 4:
            if "X" in g.letters[:4]:
                b[:4] = ["X"] * 4
            b[S] = "X"
        b = tuple(b)
        if b not in settings:
            settings.append(b)
    return settings


def default_shots(gset: GeneratorSet, setting: Sequence[str]) -> int:
    """Shots per setting: 330 per X-type generator (n=4), 500 / 1000 (n=6)."""
    x_type = "X" in setting[:4]
    if gset.n == 4:
        return 990  # three X-type generators share a setting; Z-type gets the same
    return 500 if x_type else 1000


def _covers(setting: Sequence[str], p: PauliString) -> bool:
    return all(c == "I" or setting[q] == c for q, c in enumerate(p.letters))


@dataclass(frozen=True)
class GeneratorEstimate:
    label: str
    value: float
    stderr: float
    shots: float


@dataclass(frozen=True)
class WitnessReport:
    n: int
    generators: tuple[GeneratorEstimate, ...]
    value: float
    stderr: float
    bound: float
    condition: tuple[int, int] | None = None
    k_sigma: float = 3.0

    @property
    def certified(self) -> bool:
        return certify_gme(self, self.k_sigma)

    def to_dict(self) -> dict:
        cond = None
        if self.condition is not None:
            cond = {"qubit": QUBIT_NAMES[self.condition[0]], "outcome": self.condition[1]}
        return {
            "n": self.n,
            "bound": self.bound,
            "witness": self.value,
            "witness_stderr": self.stderr,
            "k_sigma": self.k_sigma,
            "certified": self.certified,
            "condition": cond,
            "generators": [
                {"label": g.label, "value": g.value, "stderr": g.stderr, "shots": g.shots}
                for g in self.generators
            ],
            "note": "standard errors treat generators as independent",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["generator", "expectation", "stderr", "shots"])
        for g in self.generators:
            w.writerow([g.label, f"{g.value:.6f}", f"{g.stderr:.6f}", g.shots])
        return buf.getvalue()


def _mean_product(t: ShotTallies, p: PauliString) -> tuple[float, float]:
    total = 0.0
    acc = 0.0
    support = p.support()
    for key, count in t.counts.items():
        total += count
        acc += count * math.prod(key[q] for q in support)
    if total == 0:
        return float("nan"), 0.0
    return p.sign * acc / total, total


def report_from_values(
    gset: GeneratorSet,
    values: Sequence[float],
    stderrs: Sequence[float] | None = None,
    shots: Sequence[float] | None = None,
    condition: tuple[int, int] | None = None,
    k_sigma: float = 3.0,
) -> WitnessReport:
    if len(values) != gset.n:
        raise WitnessError("one expectation per generator needed")
    stderrs = list(stderrs) if stderrs is not None else [0.0] * gset.n
    shots = list(shots) if shots is not None else [0] * gset.n
    labels = gset.labels()
    gens = tuple(GeneratorEstimate(labels[k], float(values[k]), float(stderrs[k]), shots[k]) for k in range(gset.n))
    value = gset.bound - sum(values) / gset.n
    err = math.sqrt(sum(e * e for e in stderrs)) / gset.n
    return WitnessReport(gset.n, gens, value, err, gset.bound, condition, k_sigma)


def witness_value(
    tallies: Mapping[tuple[str, ...], ShotTallies] | Sequence[ShotTallies],
    gset: GeneratorSet,
    condition: tuple[int, int] | None = None,
    k_sigma: float = 3.0,
) -> WitnessReport:
    """Estimate the witness from tallies keyed by (or carrying) their settings.

    ``condition=(qubit, outcome)`` keeps only shots with that outcome. Every
    setting covering a generator is pooled into its estimate.
    """
    pool = list(tallies.values()) if isinstance(tallies, Mapping) else list(tallies)
    if condition is not None:
        pool = [t.filter(*condition) for t in pool]
    values, errs, shots = [], [], []
    labels = gset.labels()
    for k in range(gset.n):
        p = gset.readout_pauli(k)
        covering = [t for t in pool if _covers(t.bases, p)]
        if not covering:
            raise WitnessError(f"generator {labels[k]} is not covered by any setting")
        merged = covering[0]
        for t in covering[1:]:
            merged = ShotTallies(merged.counts + t.counts, merged.bases, merged.config, merged.exact)
        mean, n = _mean_product(merged, p)
        if n == 0:
            raise WitnessError(f"no shots left for generator {labels[k]}")
        err = 0.0 if merged.exact else math.sqrt(max(1 - mean * mean, 0.0) / n)
        values.append(mean)
        errs.append(err)
        shots.append(n)
    return report_from_values(gset, values, errs, shots, condition, k_sigma)


def certify_gme(report: WitnessReport, k_sigma: float = 3.0) -> bool:
    return report.value + k_sigma * report.stderr < 0
