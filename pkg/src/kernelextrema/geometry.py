"""Hyperbolic geometry of the unit disk.

The disk carries the Mobius-invariant measure

    dm(z) = dx dy / (pi * (1 - |z|^2)^2),

normalized so that it corresponds to constant curvature -4*pi.  This module
provides the measure of centered disks, the disk automorphisms
z -> (z - conj(w)) / (1 - z*w), and evaluation of the normalized reproducing
kernels

    K_w(z) = (1 - |w|^2)^(alpha/p) / (1 - z*w)^(2*alpha/p)

for the spaces identified by a pair (p, alpha).  All operations are pure;
evaluation helpers accept numpy arrays of points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# Constructors reject points this close to the unit circle so that
# 1/(1-|z|^2) stays finite everywhere a DiskPoint can appear.
BOUNDARY_MARGIN = 1e-15


@dataclass(frozen=True)
class DiskPoint:
    """A point strictly inside the unit disk."""

    re: float
    im: float

    def __post_init__(self):
        if self.re * self.re + self.im * self.im >= 1.0 - BOUNDARY_MARGIN:
            raise DomainError(
                f"point {self.re}+{self.im}j is not strictly inside the unit disk"
            )

    @classmethod
    def from_complex(cls, z: complex) -> "DiskPoint":
        return cls(float(np.real(z)), float(np.imag(z)))

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    def __complex__(self) -> complex:
        return self.z

    @property
    def abs2(self) -> float:
        return self.re * self.re + self.im * self.im


@dataclass(frozen=True)
class MobiusMap:
    """The disk automorphism z -> (z - conj(w)) / (1 - z*w).

    It maps the unit disk bijectively onto itself and sends conj(w) to 0.
    The denominator never vanishes for |z| <= 1 and |w| < 1.
    """

    w: DiskPoint

    def apply_values(self, z: np.ndarray | complex) -> np.ndarray | complex:
        w = self.w.z
        return (z - np.conj(w)) / (1.0 - z * w)


def as_complex(z: "DiskPoint | complex") -> complex:
    return z.z if isinstance(z, DiskPoint) else complex(z)


@dataclass(frozen=True)
class SpaceParams:
    """Identifies a space by the pair (p, alpha); alpha = 1 is the Hardy space H^p.

    The membership criterion for alpha > 1 is finiteness of

        (alpha - 1) * integral of |f|^p (1-|z|^2)^alpha dm(z),

    and the Hardy norm arises as the alpha -> 1 limit of these norms along
    p/alpha = const.  The derived quantities: ``ratio`` is p/alpha and
    ``kernel_exponent`` is the power 2*alpha/p in the kernel denominator.
    """

    p: float
    alpha: float = 1.0

    def __post_init__(self):
        if not self.p > 0:
            raise DomainError(f"p must be positive, got {self.p}")
        if not self.alpha >= 1:
            raise DomainError(f"alpha must be >= 1, got {self.alpha}")

    @property
    def is_hardy(self) -> bool:
        return self.alpha == 1.0

    @property
    def ratio(self) -> float:
        return self.p / self.alpha

    @property
    def kernel_exponent(self) -> float:
        return 2.0 * self.alpha / self.p


def hyperbolic_area_of_disk(R: float) -> float:
    """Hyperbolic measure of the centered disk {|z| < R}, equal to R^2/(1-R^2).

    Serves as the closed-form oracle for level-set quadrature: for radial
    superlevel sets every measure computation must reduce to this value.
    """
    if not 0.0 <= R < 1.0:
        raise DomainError(f"radius must lie in [0, 1), got {R}")
    R2 = R * R
    return R2 / (1.0 - R2)


def mobius_apply(m: MobiusMap, z: DiskPoint) -> DiskPoint:
    """Apply the automorphism to a disk point; the image is again in the disk."""
    return DiskPoint.from_complex(m.apply_values(z.z))


def kernel_eval(
    w: "DiskPoint | complex",
    sp: SpaceParams,
    z: "DiskPoint | complex | np.ndarray",
) -> complex | np.ndarray:
    """Evaluate the normalized reproducing kernel of (p, alpha) at z.

    Uses the principal branch of the complex power, which is single valued
    here because Re(1 - z*w) > 0 whenever |z| <= 1 and |w| < 1.
    """
    wz = as_complex(w)
    zz = z.z if isinstance(z, DiskPoint) else z
    beta = sp.kernel_exponent
    scale = (1.0 - abs(wz) ** 2) ** (sp.alpha / sp.p)
    return scale * (1.0 - zz * wz) ** (-beta)
