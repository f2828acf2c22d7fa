"""Adhesion potentials for the beam-substrate interaction.

Two laws are built in:

* ``exact``: the capped quadratic ``Phi(u) = u**2`` for ``|u| <= 1`` and ``1``
  beyond.  Its derivative jumps at ``u = +-1``, where the force is a
  selection from ``[0, 2]`` (resp. ``[-2, 0]``).
* ``smoothed``: a C1 four-branch regularisation ``Phi_eps`` that ramps the
  force down linearly on ``1 <= |u| <= 1 + eps``.

The stepping kernel in :mod:`beamadhesion.dynamics` inlines the same branch
formulas; the test suite keeps the two in agreement.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Kind",
    "PotentialSpec",
    "PotentialDomainError",
    "eval_phi",
    "eval_phi_prime",
    "select_h",
    "smoothing_residual",
    "KIND_NONE",
    "KIND_EXACT",
    "KIND_SMOOTHED",
]

# integer codes shared with the compiled kernels
KIND_NONE = 0
KIND_EXACT = 1
KIND_SMOOTHED = 2


class Kind(str, enum.Enum):
    EXACT = "exact"
    SMOOTHED = "smoothed"


class PotentialDomainError(ValueError):
    """Classical derivative requested where the exact law jumps."""


@dataclass(frozen=True)
class PotentialSpec:
    """Adhesion law plus the force selection used at ``|u| = 1``.

    Use :meth:`exact` or :meth:`smoothed` rather than the raw constructor;
    they set ``kappa`` (the constant in ``Phi(u) >= kappa u**2`` on [-1, 1]).
    """

    kind: Kind
    eps: float = 0.0
    selection_at_one: float = 0.0
    kappa: float = field(default=1.0)

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.SMOOTHED:
            if not (self.eps > 0.0 and self.eps < 2.0):
                raise ValueError(f"smoothing eps must lie in (0, 2), got {self.eps!r}")
        if not 0.0 <= self.selection_at_one <= self.jump_at_one:
            raise ValueError(
                f"selection_at_one={self.selection_at_one!r} outside [0, {self.jump_at_one}]"
            )
        if self.kappa <= 0.0:
            raise ValueError("kappa must be positive")

    @classmethod
    def exact(cls, selection_at_one: float = 0.0) -> "PotentialSpec":
        return cls(Kind.EXACT, 0.0, float(selection_at_one), 1.0)

    @classmethod
    def smoothed(cls, eps: float) -> "PotentialSpec":
        eps = float(eps)
        return cls(Kind.SMOOTHED, eps, 0.0, (2.0 - eps) / 2.0)

    @property
    def jump_at_one(self) -> float:
        """Left limit of the force at ``u = 1``."""
        return 2.0 if self.kind is Kind.EXACT else 2.0 - self.eps

    @property
    def code(self) -> int:
        return KIND_EXACT if self.kind is Kind.EXACT else KIND_SMOOTHED

    @property
    def cutoff(self) -> float:
        """Displacement beyond which the force vanishes identically."""
        return 1.0 if self.kind is Kind.EXACT else 1.0 + self.eps

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "selection_at_one": self.selection_at_one}
        if self.kind is Kind.SMOOTHED:
            d["eps"] = self.eps
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        kind = Kind(d.get("kind", "exact"))
        if kind is Kind.EXACT:
            return cls.exact(d.get("selection_at_one", 0.0))
        if "eps" not in d:
            raise ValueError("smoothed potential requires 'eps'")
        return cls.smoothed(d["eps"])


def eval_phi(spec: PotentialSpec, u):
    """Adhesion energy density ``Phi(u)``; accepts scalars or arrays."""
    u = np.asarray(u, dtype=float)
    a = np.abs(u)
    if spec.kind is Kind.EXACT:
        out = np.where(a <= 1.0, u * u, 1.0)
    else:
        e = spec.eps
        c = (2.0 - e) / e
        core = 0.5 * (2.0 - e) * u * u
        shoulder = c * ((1.0 + e) * (a - 0.5) - 0.5 * a * a)
        cap = 0.5 * (2.0 - e) * (1.0 + e)
        out = np.where(a <= 1.0, core, np.where(a <= 1.0 + e, shoulder, cap))
    return out[()] if out.ndim == 0 else out


def eval_phi_prime(spec: PotentialSpec, u):
    """Classical derivative ``Phi'(u)``.

    Raises :class:`PotentialDomainError` for the exact law at ``u = +-1``;
    use :func:`select_h` there.
    """
    u = np.asarray(u, dtype=float)
    a = np.abs(u)
    if spec.kind is Kind.EXACT:
        if np.any(a == 1.0):
            raise PotentialDomainError(
                "Phi' is discontinuous at |u| = 1; use select_h for the force there"
            )
        out = np.where(a < 1.0, 2.0 * u, 0.0)
    else:
        e = spec.eps
        c = (2.0 - e) / e
        shoulder = np.sign(u) * c * (1.0 + e - a)
        out = np.where(a <= 1.0, (2.0 - e) * u, np.where(a <= 1.0 + e, shoulder, 0.0))
    return out[()] if out.ndim == 0 else out


def select_h(spec: PotentialSpec, u):
    """Force selection ``h(u)`` from the subdifferential of ``Phi'``.

    Equal to ``Phi'(u)`` off the jump points; ``+-selection_at_one`` at
    ``u = +-1``.  For the smoothed law this is just ``Phi'_eps``.
    """
    if spec.kind is Kind.SMOOTHED:
        return eval_phi_prime(spec, u)
    u = np.asarray(u, dtype=float)
    s = spec.selection_at_one
    out = np.where(np.abs(u) < 1.0, 2.0 * u, 0.0)
    out = np.where(u == 1.0, s, out)
    out = np.where(u == -1.0, -s, out)
    return out[()] if out.ndim == 0 else out


def smoothing_residual(eps: float, step: float = 1e-4) -> float:
    """``sup |Phi_eps - Phi|`` estimated on a dense grid plus the breakpoints."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    smooth = PotentialSpec.smoothed(eps)
    exact = PotentialSpec.exact()
    reach = 2.0 + eps
    u = np.arange(-reach, reach + step, step)
    u = np.concatenate([u, [-1.0 - eps, -1.0, 1.0, 1.0 + eps]])
    return float(np.max(np.abs(eval_phi(smooth, u) - eval_phi(exact, u))))
