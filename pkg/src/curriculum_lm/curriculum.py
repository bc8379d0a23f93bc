"""CDF normalisation of raw difficulty and the linear competence schedule."""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .difficulty import DifficultyMethod, RawScores, write_scores
from .errors import ConfigError, DataError

log = logging.getLogger(__name__)


def cdf_normalize(raw: "RawScores | Sequence[float]") -> list[float]:
    """eps(s) = #{t : raw(t) <= raw(s)} / N.

    Tied samples share the upper rank, so they become eligible together.
    """
    values = raw.values if isinstance(raw, RawScores) else raw
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DataError("cannot normalise an empty score vector")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise DataError(f"non-finite raw difficulty for sample {int(bad[0])}: {arr[bad[0]]}")
    n = arr.size
    ranks = np.searchsorted(np.sort(arr, kind="stable"), arr, side="right")
    return [int(r) / n for r in ranks]


def check_schedule(lambda0: float, lambda_increment: float) -> None:
    if not (isinstance(lambda0, (int, float)) and math.isfinite(lambda0) and 0.0 < lambda0 <= 1.0):
        raise ConfigError(f"lambda0 must lie in (0, 1], got {lambda0}")
    if not (math.isfinite(lambda_increment) and lambda_increment >= 0.0):
        raise ConfigError(f"lambda_increment must be a finite non-negative number, got {lambda_increment}")


def linear_competence(lambda0: float, lambda_increment: float, t: int) -> float:
    """min(1, lambda0 + t * increment), computed directly rather than accumulated."""
    return min(1.0, lambda0 + t * lambda_increment)


@dataclass
class CurriculumState:
    eps: tuple[float, ...]
    lambda0: float
    lambda_increment: float
    step: int = 0
    method: str = ""
    order: tuple[int, ...] = field(init=False)
    sorted_eps: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self):
        check_schedule(self.lambda0, self.lambda_increment)
        if not self.eps:
            raise DataError("curriculum needs at least one sample")
        if any(not (0.0 < e <= 1.0) for e in self.eps):
            raise DataError("every eps must lie in (0, 1]")
        self.eps = tuple(float(e) for e in self.eps)
        # stable sort: ties keep id order
        self.order = tuple(sorted(range(len(self.eps)), key=self.eps.__getitem__))
        self.sorted_eps = tuple(self.eps[i] for i in self.order)

    @classmethod
    def from_raw(cls, raw: RawScores, lambda0: float, lambda_increment: float) -> "CurriculumState":
        return cls(tuple(cdf_normalize(raw)), lambda0, lambda_increment, method=raw.method.value)

    def __len__(self) -> int:
        return len(self.eps)

    @property
    def lam(self) -> float:
        return competence(self, self.step)

    def advance(self) -> None:
        self.step += 1

    def eligible_prefix(self, lam: float) -> int:
        """Size of the eligible prefix of `order`, never zero.

        When lam is below the easiest eps the easiest tie class is returned
        instead, since an empty eligible set would stall training.
        """
        k = eligible_count(self, lam)
        if k == 0:
            k = eligible_count(self, self.sorted_eps[0])
            log.warning("competence %.6g below easiest difficulty %.6g; using the %d easiest samples", lam, self.sorted_eps[0], k)
        return k


def competence(state: CurriculumState, t: int) -> float:
    if t < 0:
        raise ValueError("step must be non-negative")
    return linear_competence(state.lambda0, state.lambda_increment, t)


def eligible_count(state: CurriculumState, lam: float) -> int:
    return bisect.bisect_right(state.sorted_eps, lam)


def steps_to_full_competence(lambda0: float, lambda_increment: float) -> float:
    """First t with lambda_t == 1; inf when the schedule never gets there."""
    if lambda0 >= 1.0:
        return 0
    if lambda_increment <= 0.0:
        return math.inf
    t = math.ceil((1.0 - lambda0) / lambda_increment)
    # float rounding in the division can land one step off either way
    while t > 0 and linear_competence(lambda0, lambda_increment, t - 1) >= 1.0:
        t -= 1
    while linear_competence(lambda0, lambda_increment, t) < 1.0:
        t += 1
    return t


def curriculum_header(method: str, lambda0: float, lambda_increment: float) -> str:
    return f"#method={method} lambda0={lambda0!r} increment={lambda_increment!r}"


def write_curriculum(path: str | Path, raw: RawScores, state: CurriculumState) -> None:
    header = curriculum_header(raw.method.value, state.lambda0, state.lambda_increment)
    write_scores(path, raw, state.eps, header=header)


@dataclass(frozen=True)
class CurriculumFile:
    method: str
    lambda0: float
    lambda_increment: float
    raw: tuple[float, ...]
    eps: tuple[float, ...]

    def state(self) -> CurriculumState:
        return CurriculumState(self.eps, self.lambda0, self.lambda_increment, method=self.method)


def read_curriculum(path: str | Path) -> CurriculumFile:
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    if not lines or not lines[0].startswith("#"):
        raise DataError(f"{path}: missing '#method=... lambda0=... increment=...' header")
    try:
        meta = dict(kv.split("=", 1) for kv in lines[0][1:].split())
        method = DifficultyMethod.parse(meta["method"]).value
        lambda0, inc = float(meta["lambda0"]), float(meta["increment"])
    except (KeyError, ValueError, ConfigError) as e:
        raise DataError(f"{path}: malformed header {lines[0]!r}") from e
    raw, eps = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3 or parts[0] != str(len(raw)):
            raise DataError(f"{path}:{lineno}: expected 'id<TAB>raw<TAB>eps' with id {len(raw)}")
        try:
            raw.append(float(parts[1]))
            eps.append(float(parts[2]))
        except ValueError as e:
            raise DataError(f"{path}:{lineno}: {e}") from e
    return CurriculumFile(method, lambda0, inc, tuple(raw), tuple(eps))
