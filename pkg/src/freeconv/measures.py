"""Probability measures: finite atomic laws and the semicircle family.

Measures are immutable after construction; every operation here is pure.
The atomic representation keeps positions strictly increasing with strictly
positive weights that sum to one (validated at construction, assumed
everywhere downstream).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import DegenerateMeasureError, DomainError

_WEIGHT_SUM_TOL = 1e-12
_MERGE_TOL = 0.0  # positions must match exactly to be merged


def _catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


@dataclass(frozen=True)
class Measure:
    """Tagged probability measure: atomic (finite support) or semicircle.

    Atomic measures carry ``atoms`` as a tuple of (position, weight) pairs
    sorted by position.  Semicircle measures carry only their variance.
    """

    kind: str
    atoms: tuple[tuple[float, float], ...] = field(default=())
    variance_param: float = 0.0

    # -- constructors ------------------------------------------------------

    @staticmethod
    def atomic(positions, weights) -> "Measure":
        pairs = sorted(zip(map(float, positions), map(float, weights)))
        merged: list[list[float]] = []
        for x, w in pairs:
            if w <= 0.0:
                raise DomainError(f"atom weight must be positive, got {w}")
            if merged and x == merged[-1][0]:
                merged[-1][1] += w
            else:
                merged.append([x, w])
        total = sum(w for _, w in merged)
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise DomainError(f"atom weights must sum to 1, got {total!r}")
        return Measure(kind="atomic", atoms=tuple((x, w) for x, w in merged))

    @staticmethod
    def semicircle(variance: float) -> "Measure":
        if variance <= 0.0:
            raise DomainError(f"semicircle variance must be positive, got {variance}")
        return Measure(kind="semicircle", variance_param=float(variance))

    @staticmethod
    def point(a: float) -> "Measure":
        return Measure.atomic([a], [1.0])

    @staticmethod
    def bernoulli() -> "Measure":
        """Symmetric two-point law at +-1: mean 0, variance 1."""
        return Measure.atomic([-1.0, 1.0], [0.5, 0.5])

    @staticmethod
    def binomial(p: float) -> "Measure":
        """Two-point law with atom sqrt(q/p) of weight p and -sqrt(p/q) of weight q.

        Standardized (mean 0, variance 1) for every p in (0, 1); p = 1/2
        recovers the Bernoulli law.
        """
        if not 0.0 < p < 1.0:
            raise DomainError(f"binomial parameter must be in (0,1), got {p}")
        q = 1.0 - p
        return Measure.atomic(
            [-math.sqrt(p / q), math.sqrt(q / p)], [q, p]
        )

    # -- basic statistics --------------------------------------------------

    def moment(self, k: int) -> float:
        """k-th raw moment; exact for atoms, closed form for the semicircle."""
        if k < 1:
            raise DomainError("moment order must be >= 1")
        if self.kind == "atomic":
            return sum(w * x**k for x, w in self.atoms)
        if k % 2 == 1:
            return 0.0
        return self.variance_param ** (k // 2) * _catalan(k // 2)

    def abs_moment(self, k: int) -> float:
        """k-th absolute moment."""
        if k < 1:
            raise DomainError("moment order must be >= 1")
        if self.kind == "atomic":
            return sum(w * abs(x) ** k for x, w in self.atoms)
        # beta_k of the variance-1 semicircle is 2^{k+1}/pi * B((k+1)/2, 3/2)
        beta = (
            2.0 ** (k + 1)
            / math.pi
            * math.gamma((k + 1) / 2)
            * math.gamma(1.5)
            / math.gamma((k + 1) / 2 + 1.5)
        )
        return self.variance_param ** (k / 2) * beta

    @property
    def mean(self) -> float:
        if self.kind == "atomic":
            return self.moment(1)
        return 0.0

    @property
    def var(self) -> float:
        m1 = self.mean
        return self.moment(2) - m1 * m1

    @property
    def support_radius(self) -> float:
        """Smallest L with support contained in [-L, L]."""
        if self.kind == "atomic":
            return max(abs(x) for x, _ in self.atoms)
        return 2.0 * math.sqrt(self.variance_param)

    # -- transformations ---------------------------------------------------

    def dilate(self, c: float) -> "Measure":
        """Pushforward under x -> c*x; semicircle variance scales by c^2."""
        if c <= 0.0:
            raise DomainError(f"dilation factor must be positive, got {c}")
        if self.kind == "atomic":
            return Measure.atomic([c * x for x, _ in self.atoms],
                                  [w for _, w in self.atoms])
        return Measure.semicircle(c * c * self.variance_param)

    def scale(self, c: float) -> "Measure":
        """Signed dilation x -> c*x; c = 0 collapses to the point mass at 0."""
        if c > 0.0:
            return self.dilate(c)
        if self.kind == "semicircle":
            if c == 0.0:
                return Measure.point(0.0)
            return Measure.semicircle(c * c * self.variance_param)
        if c == 0.0:
            return Measure.point(0.0)
        return Measure.atomic([c * x for x, _ in self.atoms],
                              [w for _, w in self.atoms])

    def shift(self, a: float) -> "Measure":
        if self.kind != "atomic":
            raise DomainError("shift is only defined for atomic measures here")
        return Measure.atomic([x + a for x, _ in self.atoms],
                              [w for _, w in self.atoms])

    def standardize(self) -> "Measure":
        """Center and scale to mean 0, variance 1."""
        if self.kind == "semicircle":
            return Measure.semicircle(1.0)
        v = self.var
        if v <= 0.0:
            raise DegenerateMeasureError("cannot standardize a zero-variance measure")
        return self.shift(-self.mean).dilate(1.0 / math.sqrt(v))

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        if self.kind == "atomic":
            return {
                "kind": "atomic",
                "atoms": [{"x": x, "w": w} for x, w in self.atoms],
            }
        return {"kind": "semicircle", "variance": self.variance_param}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json_dict(d: dict) -> "Measure":
        kind = d.get("kind")
        if kind == "atomic":
            atoms = d["atoms"]
            return Measure.atomic([a["x"] for a in atoms], [a["w"] for a in atoms])
        if kind == "semicircle":
            return Measure.semicircle(d["variance"])
        raise DomainError(f"unknown measure kind {kind!r}")

    @staticmethod
    def from_json(s: str) -> "Measure":
        return Measure.from_json_dict(json.loads(s))

    @staticmethod
    def from_preset(name: str) -> "Measure":
        """Parse a preset spec: bernoulli, binomial:<p>, semicircle:<c>."""
        if name == "bernoulli":
            return Measure.bernoulli()
        if name.startswith("binomial:"):
            return Measure.binomial(float(name.split(":", 1)[1]))
        if name.startswith("semicircle"):
            parts = name.split(":", 1)
            c = float(parts[1]) if len(parts) == 2 else 1.0
            return Measure.semicircle(c)
        raise DomainError(f"unknown measure preset {name!r}")


def semicircle_density(x):
    """Density of the variance-1 semicircle law, sqrt(4-x^2)/(2 pi) on [-2,2]."""
    import numpy as np

    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 2.0
    out[inside] = np.sqrt(4.0 - x[inside] ** 2) / (2.0 * math.pi)
    return out if out.ndim else float(out)


def semicircle_cdf(x):
    """CDF of the variance-1 semicircle law, clamped to [0, 1]."""
    import numpy as np

    x = np.asarray(x, dtype=float)
    xc = np.clip(x, -2.0, 2.0)
    val = 0.5 + xc * np.sqrt(4.0 - xc**2) / (4.0 * math.pi) + np.arcsin(xc / 2.0) / math.pi
    val = np.clip(val, 0.0, 1.0)
    return val if val.ndim else float(val)


def arcsine_cdf(x):
    """CDF of the arcsine law on [-2, 2] (Bernoulli + Bernoulli, free)."""
    import numpy as np

    x = np.asarray(x, dtype=float)
    xc = np.clip(x, -2.0, 2.0)
    val = 0.5 + np.arcsin(xc / 2.0) / math.pi
    return val if val.ndim else float(val)
