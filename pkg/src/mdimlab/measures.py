"""Shift-invariant measures: i.i.d. products and two-component mixtures of them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDistribution

PROB_TOL = 1e-12


def entropy(p) -> float:
    """Shannon entropy in nats with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def binary_entropy(p: float) -> float:
    return entropy([p, 1.0 - p])


@dataclass(frozen=True)
class MeasureModel:
    """I.i.d. product measure on the shift.

    ``kind="levels"`` puts ``probs[i]`` on ``levels[i]`` at every coordinate.
    ``kind="continuous"`` is Lebesgue on [0, 1] scaled by 1 - sum(atom masses)
    plus point atoms given as (position, mass) pairs.
    """

    kind: str
    levels: tuple = ()
    probs: tuple = ()
    atoms: tuple = ()
    name: str = "mu"
    params: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.kind == "levels":
            lv = tuple(float(v) for v in self.levels)
            pr = tuple(float(v) for v in self.probs)
            if len(lv) != len(pr) or not lv:
                raise InvalidDistribution("levels and probs must be nonempty and aligned")
            if any(v < 0 for v in pr) or abs(sum(pr) - 1.0) > PROB_TOL:
                raise InvalidDistribution(f"probabilities {pr} do not form a distribution")
            object.__setattr__(self, "levels", lv)
            object.__setattr__(self, "probs", pr)
        elif self.kind == "continuous":
            at = tuple((float(x), float(w)) for x, w in self.atoms)
            if any(w < 0 or not 0 <= x <= 1 for x, w in at) or sum(w for _, w in at) > 1 + PROB_TOL:
                raise InvalidDistribution("atoms must sit in [0, 1] with total mass <= 1")
            object.__setattr__(self, "atoms", at)
        else:
            raise ValueError(f"unknown measure kind {self.kind!r}")

    # constructors
    @classmethod
    def on_levels(cls, levels, probs, name: str = "mu", **params):
        return cls("levels", tuple(levels), tuple(probs), name=name, params=tuple(params.items()))

    @classmethod
    def bernoulli(cls, p: float, levels=(0.0, 1.0)):
        """Two-level measure with mass p on the upper level."""
        return cls.on_levels(levels, (1.0 - p, p), name=f"bernoulli({p:g})", p=p)

    @classmethod
    def uniform_levels(cls, m: int):
        levels = (0.0,) if m == 1 else tuple(i / (m - 1) for i in range(m))
        return cls.on_levels(levels, (1.0 / m,) * m, name=f"uniform-levels({m})", m=m)

    @classmethod
    def point_mass(cls, level: float = 0.0, levels=(0.0, 1.0)):
        levels = tuple(levels)
        probs = tuple(1.0 if v == level else 0.0 for v in levels)
        return cls.on_levels(levels, probs, name=f"point-mass({level:g})", level=level)

    @classmethod
    def lebesgue(cls):
        return cls("continuous", name="lebesgue", params=(("atom", 0.0),))

    @classmethod
    def with_atom(cls, mass: float, position: float = 0.0):
        """Lebesgue scaled by 1 - mass plus an atom; its information dimension is 1 - mass."""
        if mass == 0:
            return cls.lebesgue()
        return cls("continuous", atoms=((position, mass),), name=f"lebesgue+atom({mass:g})",
                   params=(("atom", mass),))

    # queries
    @property
    def continuous_mass(self) -> float:
        if self.kind == "levels":
            return 0.0
        return 1.0 - sum(w for _, w in self.atoms)

    @property
    def is_point_mass(self) -> bool:
        if self.kind == "levels":
            return max(self.probs) >= 1.0 - PROB_TOL
        return self.continuous_mass <= PROB_TOL and len([w for _, w in self.atoms if w > 0]) == 1

    def support_levels(self) -> np.ndarray:
        if self.kind != "levels":
            raise ValueError("continuous measures have no level support")
        return np.asarray([v for v, p in zip(self.levels, self.probs) if p > 0])

    @property
    def min_support_gap(self) -> float:
        if self.kind != "levels":
            return 0.0
        s = self.support_levels()
        return math.inf if len(s) < 2 else float(np.min(np.diff(s)))

    @property
    def coordinate_entropy(self) -> float:
        return entropy(self.probs) if self.kind == "levels" else math.inf

    def components(self) -> list:
        return [(1.0, self)]

    def bin_masses(self, edges) -> np.ndarray:
        """Mass of each cell [edges[k], edges[k+1]) (the last cell is closed)."""
        edges = np.asarray(edges, dtype=float)
        B = len(edges) - 1
        out = np.zeros(B)
        if self.kind == "levels":
            idx = np.clip(np.searchsorted(edges, self.levels, side="right") - 1, 0, B - 1)
            np.add.at(out, idx, self.probs)
            return out
        out += self.continuous_mass * np.diff(np.clip(edges, 0.0, 1.0))
        for x, w in self.atoms:
            k = min(max(int(np.searchsorted(edges, x, side="right")) - 1, 0), B - 1)
            out[k] += w
        return out

    def open_ball_mass(self, centers, radius):
        """Mass of {v : |v - c| < r} for arrays of centres and radii (broadcast)."""
        c = np.asarray(centers, dtype=float)
        r = np.asarray(radius, dtype=float)
        if self.kind == "levels":
            order = np.argsort(self.levels)
            lv = np.asarray(self.levels)[order]
            cum = np.concatenate([[0.0], np.cumsum(np.asarray(self.probs)[order])])
            c, r = np.broadcast_arrays(c, r)
            # levels strictly inside (c - r, c + r)
            hi = np.searchsorted(lv, c + r, side="left")
            lo = np.searchsorted(lv, c - r, side="right")
            return np.clip(cum[hi] - cum[np.minimum(lo, hi)], 0.0, 1.0)
        lo = np.clip(c - r, 0.0, 1.0)
        hi = np.clip(c + r, 0.0, 1.0)
        out = self.continuous_mass * (hi - lo)
        for x, w in self.atoms:
            out = out + w * (np.abs(c - x) < r)
        return out

    def sample_values(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "levels":
            idx = rng.choice(len(self.levels), size=shape, p=np.asarray(self.probs))
            return np.asarray(self.levels)[idx]
        u = rng.random(shape)
        if not self.atoms:
            return u
        pick = rng.random(shape)
        out = u.copy()
        acc = 0.0
        for x, w in self.atoms:
            sel = (pick >= acc) & (pick < acc + w)
            out[sel] = x
            acc += w
        return out

    def param_dict(self) -> dict:
        return dict(self.params)


@dataclass(frozen=True)
class MixtureModel:
    """weight * first + (1 - weight) * second; not a product measure."""

    first: MeasureModel
    second: MeasureModel
    weight: float
    name: str = "mixture"

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise InvalidDistribution("mixture weight must lie in [0, 1]")

    kind = "mixture"

    def components(self) -> list:
        return [(self.weight, self.first), (1.0 - self.weight, self.second)]

    @property
    def is_point_mass(self) -> bool:
        return all(c.is_point_mass for w, c in self.components() if w > 0) and self.first == self.second

    def sample_values(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Rows are whole sequences, each drawn from one component."""
        shape = tuple(np.atleast_1d(shape))
        which = rng.random(shape[0]) < self.weight
        a = self.first.sample_values(rng, shape)
        b = self.second.sample_values(rng, shape)
        return np.where(which.reshape((-1,) + (1,) * (len(shape) - 1)), a, b)

    def param_dict(self) -> dict:
        return {"weight": self.weight}


@dataclass
class MeasureFamily:
    """Finite parametric family of shift-invariant measures."""

    name: str
    members: list

    def __len__(self):
        return len(self.members)

    @classmethod
    def bernoulli(cls, ps=(0.5, 0.7, 0.9), levels=(0.0, 1.0)):
        return cls("bernoulli", [MeasureModel.bernoulli(p, levels) for p in ps])

    @classmethod
    def continuous_atoms(cls, masses=(0.0, 0.25, 0.5)):
        """Lebesgue together with atom-perturbed members of lower dimension."""
        return cls("lebesgue-atoms", [MeasureModel.with_atom(a) for a in masses])

    @classmethod
    def quantized(cls, m: int, skews=(0.0, 0.5)):
        """Uniform and geometrically skewed product measures on m levels."""
        levels = (0.0,) if m == 1 else tuple(i / (m - 1) for i in range(m))
        out = []
        for s in skews:
            w = np.exp(-s * np.arange(m))
            w = w / w.sum()
            out.append(MeasureModel.on_levels(levels, tuple(w), name=f"quantized({m},{s:g})", m=m, skew=s))
        return cls(f"quantized-{m}", out)
