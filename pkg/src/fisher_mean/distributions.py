"""Symmetric test distributions.

Every spec is a finite symmetric mixture of elementary pieces: Gaussian
components, Laplace components, triangular teeth, and point atoms. Specs are
immutable, validated at construction (weights sum to one, component list
closed under reflection about the center, positive finite variance), and
expose exact moments, the continuous part of the density, seeded sampling,
and JSON round-tripping.

The continuous density deliberately excludes atoms; callers that need the
full measure read the atom list via ``atoms()``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import ndtri

__all__ = [
    "DistributionSpec",
    "Gaussian",
    "Laplace",
    "GaussianMixture",
    "GaussianWithAtoms",
    "GaussianSawtooth",
    "mean",
    "variance",
    "pdf",
    "sample",
    "spec_id",
    "parse_spec",
    "spec_from_dict",
]

_WEIGHT_TOL = 1e-12
_SQRT_2PI = math.sqrt(2.0 * math.pi)


class Component(NamedTuple):
    """One elementary piece of a spec's mixture decomposition.

    kind is one of "gauss" (a=mu, b=sigma), "laplace" (a=mu, b=scale),
    "tri" (a=center, b=half-width, symmetric triangular), "atom" (a=location).
    """

    kind: str
    weight: float
    a: float
    b: float


def _gauss_pdf(x, mu, sigma):
    z = (np.asarray(x, dtype=float) - mu) / sigma
    return np.exp(-0.5 * z * z) / (sigma * _SQRT_2PI)


class DistributionSpec:
    """Base class; concrete kinds below. Immutable and shareable."""

    def components(self) -> tuple[Component, ...]:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        comps = self.components()
        mu = self.mean()
        second = 0.0
        for c in comps:
            if c.kind == "gauss":
                second += c.weight * (c.b * c.b + c.a * c.a)
            elif c.kind == "laplace":
                second += c.weight * (2.0 * c.b * c.b + c.a * c.a)
            elif c.kind == "tri":
                second += c.weight * (c.b * c.b / 6.0 + c.a * c.a)
            else:  # atom
                second += c.weight * c.a * c.a
        return second - mu * mu

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c in self.components():
            if c.kind == "gauss":
                out += c.weight * _gauss_pdf(x, c.a, c.b)
            elif c.kind == "laplace":
                out += c.weight * np.exp(-np.abs(x - c.a) / c.b) / (2.0 * c.b)
            elif c.kind == "tri":
                out += c.weight * np.maximum(0.0, c.b - np.abs(x - c.a)) / (c.b * c.b)
            # atoms carry no density
        return out

    def sample(self, stream, count: int) -> np.ndarray:
        count = int(count)
        if count < 0:
            raise ValueError("count must be >= 0")
        if count == 0:
            return np.empty(0, dtype=float)
        comps = self.components()
        cum = np.cumsum([c.weight for c in comps])
        cum[-1] = 1.0  # guard the 1e-12 normalization slack
        u_cat = stream.uniform(count)
        u_val = stream.uniform(count)
        idx = np.searchsorted(cum, u_cat, side="left")
        out = np.empty(count, dtype=float)
        for k, c in enumerate(comps):
            m = idx == k
            if not np.any(m):
                continue
            u = u_val[m]
            if c.kind == "gauss":
                out[m] = c.a + c.b * ndtri(u)
            elif c.kind == "laplace":
                out[m] = np.where(
                    u < 0.5,
                    c.a + c.b * np.log(2.0 * u),
                    c.a - c.b * np.log(2.0 * (1.0 - u)),
                )
            elif c.kind == "tri":
                out[m] = np.where(
                    u < 0.5,
                    c.a - c.b + c.b * np.sqrt(2.0 * u),
                    c.a + c.b - c.b * np.sqrt(2.0 * (1.0 - u)),
                )
            else:  # atom
                out[m] = c.a
        return out

    def atoms(self) -> tuple[tuple[float, float], ...]:
        """(weight, location) point masses of the distribution (may be empty)."""
        return tuple((c.weight, c.a) for c in self.components() if c.kind == "atom")

    # -- validation helpers -------------------------------------------------

    def _validate(self):
        comps = self.components()
        weights = [c.weight for c in comps]
        if any(w <= 0 for w in weights):
            raise ValueError("all component weights must be positive")
        if abs(sum(weights) - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"component weights sum to {sum(weights)!r}, not 1")
        self._check_reflection_symmetry()
        v = self.variance()
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"variance must be finite and positive, got {v!r}")

    def _check_reflection_symmetry(self):
        mu = self.mean()
        comps = list(self.components())
        scale = max(1.0, max(abs(c.a) for c in comps), abs(mu))
        tol = 1e-12 * scale
        unmatched = list(range(len(comps)))
        while unmatched:
            i = unmatched[0]
            ci = comps[i]
            target = 2.0 * mu - ci.a
            match = None
            for j in unmatched:
                cj = comps[j]
                if (
                    cj.kind == ci.kind
                    and abs(cj.a - target) <= tol
                    and abs(cj.b - ci.b) <= 1e-12 * max(1.0, abs(ci.b))
                    and abs(cj.weight - ci.weight) <= _WEIGHT_TOL
                ):
                    match = j
                    break
            if match is None:
                raise ValueError(
                    f"spec is not symmetric about {mu!r}: component {ci} has no mirror"
                )
            unmatched.remove(i)
            if match != i:
                unmatched.remove(match)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class Gaussian(DistributionSpec):
    mu: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        self._validate()

    def components(self):
        return (Component("gauss", 1.0, float(self.mu), float(self.sigma)),)

    def mean(self):
        return float(self.mu)

    def variance(self):
        return float(self.sigma) ** 2

    def to_dict(self):
        return {"kind": "gaussian", "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class Laplace(DistributionSpec):
    mu: float
    b: float

    def __post_init__(self):
        if self.b <= 0:
            raise ValueError("b must be positive")
        self._validate()

    def components(self):
        return (Component("laplace", 1.0, float(self.mu), float(self.b)),)

    def mean(self):
        return float(self.mu)

    def variance(self):
        return 2.0 * float(self.b) ** 2

    def to_dict(self):
        return {"kind": "laplace", "mu": self.mu, "b": self.b}


@dataclass(frozen=True)
class GaussianMixture(DistributionSpec):
    components_list: tuple  # of (weight, mu, sigma)

    def __post_init__(self):
        object.__setattr__(
            self,
            "components_list",
            tuple((float(w), float(m), float(s)) for (w, m, s) in self.components_list),
        )
        if not self.components_list:
            raise ValueError("mixture needs at least one component")
        for w, _, s in self.components_list:
            if not (0.0 < w <= 1.0):
                raise ValueError("mixture weights must lie in (0, 1]")
            if s <= 0:
                raise ValueError("component sigma must be positive")
        self._validate()

    def components(self):
        return tuple(Component("gauss", w, m, s) for (w, m, s) in self.components_list)

    def mean(self):
        return math.fsum(w * m for (w, m, _) in self.components_list)

    def to_dict(self):
        return {"kind": "gaussian_mixture", "components": [list(c) for c in self.components_list]}


@dataclass(frozen=True)
class GaussianWithAtoms(DistributionSpec):
    base_weight: float
    base_mu: float
    base_sigma: float
    atoms_list: tuple  # of (weight, location)

    def __post_init__(self):
        object.__setattr__(
            self, "atoms_list", tuple((float(w), float(x)) for (w, x) in self.atoms_list)
        )
        if not (0.0 < self.base_weight < 1.0):
            raise ValueError("base_weight must lie in (0, 1)")
        if self.base_sigma <= 0:
            raise ValueError("base_sigma must be positive")
        if not self.atoms_list:
            raise ValueError("atom list must be non-empty (use Gaussian otherwise)")
        self._validate()

    def components(self):
        base = Component("gauss", float(self.base_weight), float(self.base_mu), float(self.base_sigma))
        return (base,) + tuple(Component("atom", w, x, 0.0) for (w, x) in self.atoms_list)

    def mean(self):
        return float(self.base_mu)

    def to_dict(self):
        return {
            "kind": "gaussian_with_atoms",
            "base_weight": self.base_weight,
            "base_mu": self.base_mu,
            "base_sigma": self.base_sigma,
            "atoms": [list(a) for a in self.atoms_list],
        }


@dataclass(frozen=True)
class GaussianSawtooth(DistributionSpec):
    """Gaussian bulk plus a comb of narrow triangular teeth.

    f = (1-tooth_mass) * N(mu, sigma^2)
        + tooth_mass * sum_k p_k * Tri(mu + k*tooth_width, tooth_width)

    with k = -K..K, K = (n_teeth-1)/2, Tri a symmetric triangle of support
    width tooth_width, and p_k proportional to the Gaussian density at the
    tooth center. The tooth width is the single structural scale that the
    smoothed Fisher information reacts to.
    """

    mu: float
    sigma: float
    tooth_width: float
    tooth_mass: float = 0.5
    n_teeth: int = 41
    _comps: tuple = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.tooth_width <= 0:
            raise ValueError("tooth_width must be positive")
        if not (0.0 <= self.tooth_mass < 1.0):
            raise ValueError("tooth_mass must lie in [0, 1)")
        if self.n_teeth < 1 or self.n_teeth % 2 == 0:
            raise ValueError("n_teeth must be a positive odd integer")
        object.__setattr__(self, "_comps", self._build_components())
        self._validate()

    def _build_components(self):
        mu, sig, w = float(self.mu), float(self.sigma), float(self.tooth_width)
        lam = float(self.tooth_mass)
        comps = [Component("gauss", 1.0 - lam, mu, sig)]
        if lam > 0.0:
            half = (self.n_teeth - 1) // 2
            ks = np.arange(-half, half + 1)
            raw = np.exp(-0.5 * (ks * w / sig) ** 2)
            p = raw / math.fsum(raw)
            for k, pk in zip(ks, p):
                comps.append(Component("tri", lam * float(pk), mu + k * w, w / 2.0))
        return tuple(comps)

    def components(self):
        return self._comps

    def mean(self):
        return float(self.mu)

    def variance(self):
        # Quadrature of (x-mu)^2 against the closed-form density, panels split
        # at every tooth breakpoint so each piece is smooth.
        from .quadrature import panel_nodes

        mu, sig = float(self.mu), float(self.sigma)
        lo, hi = mu - 12.0 * sig, mu + 12.0 * sig
        breaks = {lo, hi}
        for c in self._comps:
            if c.kind == "tri":
                breaks.update((c.a - c.b, c.a, c.a + c.b))
        edges = np.array(sorted(b for b in breaks if lo <= b <= hi))
        edges = _refine_edges(edges, max_width=sig / 4.0)
        x, wq = panel_nodes(edges, nodes_per_panel=32)
        fx = self.pdf(x)
        return float(np.sum(wq * (x - mu) ** 2 * fx))

    def to_dict(self):
        return {
            "kind": "gaussian_sawtooth",
            "mu": self.mu,
            "sigma": self.sigma,
            "tooth_width": self.tooth_width,
            "tooth_mass": self.tooth_mass,
            "n_teeth": self.n_teeth,
        }


def _refine_edges(edges: np.ndarray, max_width: float) -> np.ndarray:
    out = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        n = int(math.ceil((b - a) / max_width))
        if n > 1:
            out.extend(np.linspace(a, b, n + 1)[1:])
        else:
            out.append(b)
    return np.array(out)


# -- module-level operation surface -----------------------------------------


def mean(spec: DistributionSpec) -> float:
    """Symmetry center of the distribution."""
    return spec.mean()


def variance(spec: DistributionSpec) -> float:
    """Exact variance (atoms included)."""
    return spec.variance()


def pdf(spec: DistributionSpec, x):
    """Density of the absolutely continuous part at x (atoms excluded)."""
    return spec.pdf(x)


def sample(spec: DistributionSpec, stream, count: int) -> np.ndarray:
    """`count` i.i.d. draws, deterministic given the stream identity."""
    return spec.sample(stream, count)


# -- serialization and naming ------------------------------------------------

_KINDS = {}


def spec_from_dict(d: dict) -> DistributionSpec:
    """Inverse of ``spec.to_dict()``."""
    kind = d.get("kind")
    if kind == "gaussian":
        return Gaussian(d["mu"], d["sigma"])
    if kind == "laplace":
        return Laplace(d["mu"], d["b"])
    if kind == "gaussian_mixture":
        return GaussianMixture(tuple(tuple(c) for c in d["components"]))
    if kind == "gaussian_with_atoms":
        return GaussianWithAtoms(
            d["base_weight"], d["base_mu"], d["base_sigma"], tuple(tuple(a) for a in d["atoms"])
        )
    if kind == "gaussian_sawtooth":
        return GaussianSawtooth(
            d["mu"], d["sigma"], d["tooth_width"], d.get("tooth_mass", 0.5), d.get("n_teeth", 41)
        )
    raise ValueError(f"unknown spec kind {kind!r}")


def _fmt(x: float) -> str:
    return repr(float(x))


def spec_id(spec: DistributionSpec) -> str:
    """Short deterministic identifier, also accepted by :func:`parse_spec`."""
    if isinstance(spec, Gaussian):
        return f"gaussian:{_fmt(spec.mu)},{_fmt(spec.sigma)}"
    if isinstance(spec, Laplace):
        return f"laplace:{_fmt(spec.mu)},{_fmt(spec.b)}"
    if isinstance(spec, GaussianMixture):
        body = ";".join(",".join(map(_fmt, c)) for c in spec.components_list)
        return f"mixture:{body}"
    if isinstance(spec, GaussianWithAtoms):
        head = ",".join(map(_fmt, (spec.base_weight, spec.base_mu, spec.base_sigma)))
        body = ";".join(",".join(map(_fmt, a)) for a in spec.atoms_list)
        return f"atoms:{head};{body}"
    if isinstance(spec, GaussianSawtooth):
        return "sawtooth:" + ",".join(
            map(_fmt, (spec.mu, spec.sigma, spec.tooth_width, spec.tooth_mass))
        ) + f",{spec.n_teeth}"
    raise TypeError(f"unknown spec type {type(spec)!r}")


def parse_spec(text: str) -> DistributionSpec:
    """Parse the compact ``kind:params`` form or a JSON object string.

    Compact forms::

        gaussian:MU,SIGMA
        laplace:MU,B
        mixture:W,MU,SIGMA;W,MU,SIGMA;...
        atoms:BASE_W,BASE_MU,BASE_SIGMA;W,LOC;W,LOC;...
        sawtooth:MU,SIGMA,TOOTH_WIDTH[,TOOTH_MASS[,N_TEETH]]
    """
    text = text.strip()
    if text.startswith("{"):
        return spec_from_dict(json.loads(text))
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    if not body:
        raise ValueError(f"malformed spec string {text!r}")
    try:
        if kind == "gaussian":
            mu, sigma = (float(v) for v in body.split(","))
            return Gaussian(mu, sigma)
        if kind == "laplace":
            mu, b = (float(v) for v in body.split(","))
            return Laplace(mu, b)
        if kind == "mixture":
            comps = tuple(
                tuple(float(v) for v in part.split(",")) for part in body.split(";") if part
            )
            return GaussianMixture(comps)
        if kind == "atoms":
            parts = [part for part in body.split(";") if part]
            bw, bmu, bsig = (float(v) for v in parts[0].split(","))
            atom_list = tuple(tuple(float(v) for v in p.split(",")) for p in parts[1:])
            return GaussianWithAtoms(bw, bmu, bsig, atom_list)
        if kind == "sawtooth":
            vals = [float(v) for v in body.split(",")]
            if len(vals) == 3:
                return GaussianSawtooth(*vals)
            if len(vals) == 4:
                return GaussianSawtooth(vals[0], vals[1], vals[2], vals[3])
            if len(vals) == 5:
                return GaussianSawtooth(vals[0], vals[1], vals[2], vals[3], int(vals[4]))
            raise ValueError("sawtooth takes 3-5 parameters")
    except ValueError:
        raise
    except Exception as exc:  # malformed numeric fields
        raise ValueError(f"malformed spec string {text!r}: {exc}") from exc
    raise ValueError(f"unknown spec kind {kind!r}")
