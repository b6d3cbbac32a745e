"""Two-qubit model of the polarization Bell test.

Observables are built from half-wave-plate angles (degrees) followed by a
polarizing beam splitter; outcome 0 is the +1 eigenvalue throughout.
Correlators, the Bell families used for randomness certification, their
classical and quantum bounds and the white-noise model live here.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "SIGMA_X",
    "SIGMA_Z",
    "TwoQubitState",
    "BinaryObservable",
    "BehaviorTable",
    "CorrelatorSet",
    "BellExpression",
    "normalize_angle",
    "hwp_observable",
    "bell_state_phi_plus",
    "maximally_mixed_state",
    "werner_state",
    "behavior",
    "correlators",
    "make_bell",
    "bell_value",
    "tsirelson_bound",
    "classical_bound",
    "apply_white_noise",
    "relative_bell_value",
    "ideal_correlators",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)

HERMITIAN_TOL = 1e-12
PSD_FLOOR = -1e-10


def _check_hermitian(m: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{what} has non-finite entries")
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise ValueError(f"{what} is not Hermitian")


@dataclass(frozen=True)
class TwoQubitState:
    density: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.density, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError("two-qubit density matrix must be 4x4")
        _check_hermitian(rho, "density matrix")
        if abs(np.trace(rho) - 1) > HERMITIAN_TOL:
            raise ValueError("density matrix must have unit trace")
        if np.linalg.eigvalsh(rho).min() < PSD_FLOOR:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "density", rho)


@dataclass(frozen=True)
class BinaryObservable:
    """A +/-1 valued observable; outcome 0 is the +1 eigenspace."""

    operator: np.ndarray

    def __post_init__(self) -> None:
        op = np.asarray(self.operator, dtype=complex)
        if op.shape != (2, 2):
            raise ValueError("observable must be 2x2")
        _check_hermitian(op, "observable")
        if np.max(np.abs(op @ op - _I2)) > HERMITIAN_TOL:
            raise ValueError("observable must square to the identity")
        object.__setattr__(self, "operator", op)

    def projector(self, outcome: int) -> np.ndarray:
        sign = 1 if outcome == 0 else -1
        return (_I2 + sign * self.operator) / 2


def _pair_key(key) -> tuple[int, int]:
    if isinstance(key, str):
        x, y = key.split(",")
        return int(x), int(y)
    x, y = key
    return int(x), int(y)


@dataclass
class BehaviorTable:
    """``probs[(x, y)]`` is the 2x2 array ``P(a, b | x, y)``."""

    probs: dict[tuple[int, int], np.ndarray]
    stderr: dict[tuple[int, int], np.ndarray] | None = None

    def __post_init__(self) -> None:
        self.probs = {_pair_key(k): np.asarray(v, dtype=float).reshape(2, 2) for k, v in self.probs.items()}
        for key, p in self.probs.items():
            if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
                raise ValueError(f"probabilities for {key} outside [0, 1]")
            if abs(p.sum() - 1) > 1e-9:
                raise ValueError(f"probabilities for {key} do not sum to one")
        if self.stderr is not None:
            self.stderr = {_pair_key(k): np.asarray(v, dtype=float).reshape(2, 2) for k, v in self.stderr.items()}

    @property
    def settings(self) -> tuple[int, int]:
        xs = {x for x, _ in self.probs}
        ys = {y for _, y in self.probs}
        return len(xs), len(ys)

    def to_json(self) -> dict:
        out = {"probs": {f"{x},{y}": p.tolist() for (x, y), p in sorted(self.probs.items())}}
        if self.stderr is not None:
            out["stderr"] = {f"{x},{y}": s.tolist() for (x, y), s in sorted(self.stderr.items())}
        return out

    @classmethod
    def from_json(cls, data: Mapping | str) -> BehaviorTable:
        if isinstance(data, str):
            data = json.loads(data)
        return cls(dict(data["probs"]), dict(data["stderr"]) if data.get("stderr") else None)


@dataclass
class CorrelatorSet:
    values: dict[tuple[int, int], float]
    stderr: dict[tuple[int, int], float] | None = None

    def __post_init__(self) -> None:
        self.values = {_pair_key(k): float(v) for k, v in self.values.items()}
        for key, c in self.values.items():
            if abs(c) > 1 + 1e-9:
                raise ValueError(f"correlator {key} = {c} outside [-1, 1]")
        if self.stderr is not None:
            self.stderr = {_pair_key(k): float(v) for k, v in self.stderr.items()}

    def __getitem__(self, key) -> float:
        return self.values[_pair_key(key)]

    def to_json(self) -> dict:
        out = {"values": {f"{x},{y}": c for (x, y), c in sorted(self.values.items())}}
        if self.stderr is not None:
            out["stderr"] = {f"{x},{y}": s for (x, y), s in sorted(self.stderr.items())}
        return out

    @classmethod
    def from_json(cls, data: Mapping | str) -> CorrelatorSet:
        if isinstance(data, str):
            data = json.loads(data)
        return cls(dict(data["values"]), dict(data["stderr"]) if data.get("stderr") else None)


_FAMILIES = ("ModCHSH", "IDelta", "JGamma", "Custom")


@dataclass(frozen=True)
class BellExpression:
    """Real linear functional ``sum coeffs[(x, y)] * C(x, y)``."""

    family: str
    coeffs: Mapping[tuple[int, int], float]
    parameter: float | None = None

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown Bell family {self.family!r}")
        coeffs = {_pair_key(k): float(v) for k, v in self.coeffs.items()}
        if not all(math.isfinite(v) for v in coeffs.values()):
            raise ValueError("Bell coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n_settings(self) -> tuple[int, int]:
        return (max(x for x, _ in self.coeffs) + 1, max(y for _, y in self.coeffs) + 1)

    def __str__(self) -> str:
        if self.parameter is None:
            return self.family
        return f"{self.family}({self.parameter:.6g})"


def normalize_angle(theta: float) -> float:
    """Map an angle in degrees to ``[-180, 180)``."""
    if not math.isfinite(theta):
        raise ValueError("angle must be finite")
    return (theta + 180.0) % 360.0 - 180.0


def hwp_observable(theta: float) -> BinaryObservable:
    """Observable of an HWP at ``theta`` degrees followed by a PBS.

    The plate rotates linear polarization by ``2 theta`` so the analyzed
    Bloch-sphere direction sits at ``4 theta`` in the x-z plane.
    """
    phi = math.radians(4 * normalize_angle(theta))
    return BinaryObservable(math.cos(phi) * SIGMA_Z + math.sin(phi) * SIGMA_X)


def bell_state_phi_plus() -> TwoQubitState:
    psi = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    return TwoQubitState(np.outer(psi, psi.conj()))


def maximally_mixed_state() -> TwoQubitState:
    return TwoQubitState(np.eye(4, dtype=complex) / 4)


def werner_state(eta: float) -> TwoQubitState:
    """``eta * phi+ + (1 - eta) * white noise``."""
    if not 0 <= eta <= 1:
        raise ValueError("eta must lie in [0, 1]")
    return TwoQubitState(eta * bell_state_phi_plus().density + (1 - eta) * maximally_mixed_state().density)


def behavior(
    state: TwoQubitState,
    alice: Iterable[BinaryObservable],
    bob: Iterable[BinaryObservable],
) -> BehaviorTable:
    """Born-rule probabilities for every pair of settings."""
    alice = [a if isinstance(a, BinaryObservable) else BinaryObservable(a) for a in alice]
    bob = [b if isinstance(b, BinaryObservable) else BinaryObservable(b) for b in bob]
    probs = {}
    for (x, ax), (y, by) in itertools.product(enumerate(alice), enumerate(bob)):
        p = np.empty((2, 2))
        for a, b in itertools.product((0, 1), repeat=2):
            op = np.kron(ax.projector(a), by.projector(b))
            p[a, b] = np.real(np.trace(state.density @ op))
        p = np.clip(p, 0.0, 1.0)
        probs[(x, y)] = p / p.sum()
    return BehaviorTable(probs)


def correlators(b: BehaviorTable) -> CorrelatorSet:
    signs = np.array([[1, -1], [-1, 1]])
    values = {k: float(np.sum(signs * p)) for k, p in b.probs.items()}
    stderr = None
    if b.stderr is not None:
        # cell errors combined in quadrature
        stderr = {k: float(np.sqrt(np.sum(s**2))) for k, s in b.stderr.items()}
    return CorrelatorSet(values, stderr)


def make_bell(family: str, parameter: float | None = None) -> BellExpression:
    """Build one of the three Bell families.

    ``IDelta`` takes ``delta`` in ``(0, pi/6]`` and ``JGamma`` takes ``gamma``
    in ``[0, pi/12]`` (radians).  ``ModCHSH`` uses three settings for Bob.
    """
    if family == "ModCHSH":
        coeffs = {(0, 1): 1.0, (0, 2): 1.0, (1, 0): 1.0, (1, 1): 1.0, (1, 2): -1.0}
        return BellExpression("ModCHSH", coeffs)
    if parameter is None or not math.isfinite(parameter):
        raise ValueError(f"{family} needs a finite parameter")
    if family == "IDelta":
        if not 0 < parameter <= math.pi / 6 + 1e-15:
            raise ValueError("delta must lie in (0, pi/6]")
        s = 1 / math.sin(parameter)
        coeffs = {(0, 0): 1.0, (0, 1): s, (1, 0): s, (1, 1): -1 / math.cos(2 * parameter)}
        return BellExpression("IDelta", coeffs, parameter)
    if family == "JGamma":
        if not 0 <= parameter <= math.pi / 12 + 1e-15:
            raise ValueError("gamma must lie in [0, pi/12]")
        k = 4 * math.cos(parameter + math.pi / 6) ** 2 - 1
        coeffs = {(0, 0): 1.0, (0, 1): k, (1, 0): k, (1, 1): -k}
        return BellExpression("JGamma", coeffs, parameter)
    raise ValueError(f"unknown Bell family {family!r}")


def bell_value(c: CorrelatorSet, e: BellExpression) -> float | tuple[float, float]:
    """Bell value; returns ``(value, stderr)`` when ``c`` carries errors.

    Setting pairs are treated as statistically independent.
    """
    missing = [k for k in e.coeffs if k not in c.values]
    if missing:
        raise KeyError(f"correlators missing for settings {missing}")
    value = sum(coef * c.values[k] for k, coef in e.coeffs.items())
    if c.stderr is None:
        return value
    var = sum(coef**2 * c.stderr.get(k, 0.0) ** 2 for k, coef in e.coeffs.items())
    return value, math.sqrt(var)


def tsirelson_bound(e: BellExpression) -> float:
    if e.family == "ModCHSH":
        return 1 + 2 * math.sqrt(2)
    if e.family == "IDelta":
        d = e.parameter
        return 2 * math.cos(d) ** 3 / (math.cos(2 * d) * math.sin(d))
    if e.family == "JGamma":
        return 8 * math.cos(e.parameter + math.pi / 6) ** 3
    raise ValueError("no closed-form quantum bound for custom expressions; maximize with NPA instead")


def classical_bound(e: BellExpression) -> float:
    """Maximum over deterministic +/-1 strategies."""
    nx, ny = e.n_settings
    best = -math.inf
    keys = list(e.coeffs)
    coef = np.array([e.coeffs[k] for k in keys])
    xs = np.array([k[0] for k in keys])
    ys = np.array([k[1] for k in keys])
    for a in itertools.product((1, -1), repeat=nx):
        a = np.array(a)
        for b in itertools.product((1, -1), repeat=ny):
            best = max(best, float(np.dot(coef, a[xs] * np.array(b)[ys])))
    return best


def apply_white_noise(c: CorrelatorSet, eta: float) -> CorrelatorSet:
    if not 0 <= eta <= 1:
        raise ValueError("eta must lie in [0, 1]")
    stderr = None if c.stderr is None else {k: eta * s for k, s in c.stderr.items()}
    return CorrelatorSet({k: eta * v for k, v in c.values.items()}, stderr)


def relative_bell_value(observed: float, e: BellExpression) -> float:
    return observed / tsirelson_bound(e)


def ideal_correlators(alice_deg: Iterable[float], bob_deg: Iterable[float], state: TwoQubitState | None = None) -> CorrelatorSet:
    """Correlators of ``state`` (default phi+) measured at HWP angles."""
    state = state or bell_state_phi_plus()
    alice = [hwp_observable(t) for t in alice_deg]
    bob = [hwp_observable(t) for t in bob_deg]
    return correlators(behavior(state, alice, bob))
