"""Weighted point clouds standing in for measures on R^n or the sphere."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

DOMAINS = ("euclidean", "sphere")
PROVENANCES = ("mu", "nu", "surface-area", "custom")


@dataclass(frozen=True)
class DiscreteMeasure:
    points: np.ndarray
    weights: np.ndarray
    domain: str = "euclidean"
    provenance: str = "custom"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if w.shape != (pts.shape[0],):
            raise ValueError("one weight per atom required")
        if np.any(w < 0):
            raise ValueError("measure weights must be nonnegative")
        if self.domain not in DOMAINS or self.provenance not in PROVENANCES:
            raise ValueError(f"bad domain/provenance {self.domain}/{self.provenance}")
        if self.domain == "sphere" and pts.size:
            if np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) > 1e-10:
                raise ValueError("sphere atoms must have unit norm")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def zero(cls, n, domain="sphere", provenance="custom"):
        return cls(np.empty((0, n)), np.empty(0), domain, provenance)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.weights)

    def integrate(self, psi) -> float:
        """``sum_i w_i psi(x_i)``; atoms of zero weight are skipped."""
        if not len(self):
            return 0.0
        keep = self.weights > 0
        if not np.any(keep):
            return 0.0
        vals = np.asarray(psi(self.points[keep]), dtype=float).reshape(-1)
        return math.fsum(self.weights[keep] * vals)

    def moment(self) -> np.ndarray:
        """Componentwise first moment ``int x dm``."""
        return np.array([math.fsum(self.weights * self.points[:, i]) for i in range(self.dim)])

    def merged(self, decimals=12) -> "DiscreteMeasure":
        """Combine atoms sitting at the same location (rounded)."""
        if not len(self):
            return self
        key = np.round(self.points, decimals)
        uniq, inv = np.unique(key, axis=0, return_inverse=True)
        w = np.zeros(len(uniq))
        np.add.at(w, inv.ravel(), self.weights)
        return DiscreteMeasure(uniq, w, self.domain, self.provenance, dict(self.meta))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i}" for i in range(self.dim)] + ["weight", "domain"])
        for p, w in zip(self.points, self.weights):
            writer.writerow([repr(float(c)) for c in p] + [repr(float(w)), self.domain])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text, provenance="custom"):
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        n = len(header) - 2
        if not body:
            return cls.zero(n, "euclidean", provenance)
        pts = np.array([[float(c) for c in r[:n]] for r in body])
        w = np.array([float(r[n]) for r in body])
        return cls(pts, w, body[0][n + 1], provenance)

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        if self.domain != other.domain:
            raise ValueError("cannot add measures on different domains")
        return DiscreteMeasure(np.vstack([self.points, other.points]),
                               np.concatenate([self.weights, other.weights]),
                               self.domain, "custom")
