"""Group cohomology with coefficients in sl2 twisted by Ad o rho.

Cochains are stored by their values on generators as an ``(n, 3)`` array,
flattened generator-major when a column vector is needed.  Z1 is the kernel
of the Fox-linearized relator map, B1 the image of X -> X - Ad(rho(g_i))X,
and H1 is realised as the orthogonal complement of B1 inside Z1 for the
standard Hermitian inner product on coordinates.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import linalg2
from .errors import CohomologyError
from .presentation import Presentation, abelianization, fox_jacobian
from .repvar import REP_TOL, Representation
from .serialize import encode_vector

log = logging.getLogger(__name__)

RANK_TOL = 1e-8
COC_TOL = 1e-8
GAP_WARN = 1e3


def _ad_of_ring_element(rho, d):
    out = np.zeros((3, 3), dtype=complex)
    for c, w in d.terms:
        out += c * linalg2.adjoint_matrix(rho.image(w))
    return out


def cocycle_matrix(rho: Representation) -> np.ndarray:
    """The 3m x 3n matrix whose kernel is Z1(G, sl2_rho).

    Block (j, i) is the Fox derivative dR_j/dg_i evaluated through Ad o rho.
    """
    P = rho.presentation
    n, m = P.generator_count, P.relator_count
    M = np.zeros((3 * m, 3 * n), dtype=complex)
    for j, row in enumerate(fox_jacobian(P)):
        for i, d in enumerate(row):
            M[3 * j:3 * j + 3, 3 * i:3 * i + 3] = _ad_of_ring_element(rho, d)
    return M


def coboundary_matrix(rho: Representation) -> np.ndarray:
    """Stacked blocks I - Ad(rho(g_i)); maps X in sl2 to its coboundary."""
    return np.vstack([np.eye(3) - linalg2.adjoint_matrix(g) for g in rho.images])


def cochain_on_word(rho: Representation, values, w):
    """Extend generator values to the word ``w`` by c(uv) = c(u) + Ad(rho(u)) c(v)."""
    values = np.asarray(values).reshape(-1, 3)
    total = np.zeros(3, dtype=complex)
    prefix = linalg2.identity()
    for x in w:
        i = abs(x) - 1
        if x > 0:
            total = total + linalg2.adjoint_matrix(prefix) @ values[i]
            prefix = prefix @ rho.images[i]
        else:
            prefix = prefix @ linalg2.inv(rho.images[i])
            total = total - linalg2.adjoint_matrix(prefix) @ values[i]
    return total


@dataclass(frozen=True)
class RankDecision:
    rank: int
    singular_values: np.ndarray
    gap: float
    ill_conditioned: bool

    def to_json(self):
        return {
            "rank": self.rank,
            "singular_values": [float(s) for s in self.singular_values],
            "gap": self.gap,
            "ill_conditioned": self.ill_conditioned,
        }


def numerical_rank(A, rank_tol=RANK_TOL, what="matrix"):
    """Rank with threshold ``rank_tol * max(1, sigma_max)``.

    The gap is sigma_r / sigma_{r+1} at the cut (inf when nothing is
    dropped or everything is exactly zero).
    """
    if A.size == 0:
        return RankDecision(0, np.zeros(0), float("inf"), False), np.zeros((0, A.shape[0])), np.eye(A.shape[1])
    u, s, vh = np.linalg.svd(A)
    scale = max(1.0, s[0] if s.size else 0.0)
    r = int(np.sum(s > rank_tol * scale))
    kept = s[r - 1] if r else scale
    dropped = s[r] if r < s.size else 0.0
    gap = float("inf") if dropped == 0 else float(kept / dropped)
    ill = gap < GAP_WARN
    if ill:
        log.warning("ill-conditioned rank decision for %s: gap %.3g at rank %d", what, gap, r)
    return RankDecision(r, s, gap, ill), u[:, :r], vh[r:].conj().T


@dataclass(frozen=True, eq=False)
class CohomologyReport:
    base: Representation
    dim_Z1: int
    dim_B1: int
    dim_H1: int
    dim_centralizer: int
    z1_rank: RankDecision
    b1_rank: RankDecision
    z1_basis: np.ndarray = field(repr=False)
    b1_basis: np.ndarray = field(repr=False)
    h1_basis: np.ndarray = field(repr=False)
    centralizer_basis: np.ndarray = field(repr=False)

    @property
    def dims(self):
        return (self.dim_Z1, self.dim_B1, self.dim_H1, self.dim_centralizer)

    @property
    def ill_conditioned(self):
        return self.z1_rank.ill_conditioned or self.b1_rank.ill_conditioned

    def to_json(self):
        n = self.base.generator_count
        return {
            "dim_Z1": self.dim_Z1,
            "dim_B1": self.dim_B1,
            "dim_H1": self.dim_H1,
            "dim_centralizer": self.dim_centralizer,
            "cocycle_rank": self.z1_rank.to_json(),
            "coboundary_rank": self.b1_rank.to_json(),
            "ill_conditioned": self.ill_conditioned,
            "slice_basis": [
                [encode_vector(v) for v in self.h1_basis[:, k].reshape(n, 3)]
                for k in range(self.dim_H1)
            ],
        }


def cohomology_report(rho: Representation, rank_tol: float = RANK_TOL) -> CohomologyReport:
    n = rho.generator_count
    if not rho.on_variety(REP_TOL):
        log.warning("cohomology of an off-variety point (residual %.3g)", rho.residual)
    M = cocycle_matrix(rho)
    if M.shape[0]:
        z_dec, _, z1 = numerical_rank(M, rank_tol, "cocycle matrix")
    else:
        z_dec, z1 = RankDecision(0, np.zeros(0), float("inf"), False), np.eye(3 * n, dtype=complex)
    C = coboundary_matrix(rho)
    b_dec, b1, cent = numerical_rank(C, rank_tol, "coboundary matrix")
    dim_z1 = z1.shape[1]
    dim_b1 = b_dec.rank
    if dim_b1 > dim_z1:
        raise CohomologyError(f"B1 (dim {dim_b1}) does not fit in Z1 (dim {dim_z1})")
    dim_h1 = dim_z1 - dim_b1
    # complement of B1 inside Z1
    if dim_h1:
        resid = z1 - b1 @ (b1.conj().T @ z1)
        u, _, _ = np.linalg.svd(resid, full_matrices=False)
        h1 = u[:, :dim_h1]
    else:
        h1 = np.zeros((3 * n, 0), dtype=complex)
    return CohomologyReport(
        base=rho, dim_Z1=dim_z1, dim_B1=dim_b1, dim_H1=dim_h1, dim_centralizer=3 - dim_b1,
        z1_rank=z_dec, b1_rank=b_dec, z1_basis=z1, b1_basis=b1, h1_basis=h1,
        centralizer_basis=cent,
    )


def aut0_dimension(rho: Representation, rank_tol: float = RANK_TOL) -> int:
    """Dimension of the centralizer of rho(G), i.e. of the kernel of the coboundary map."""
    dec, _, _ = numerical_rank(coboundary_matrix(rho), rank_tol, "coboundary matrix")
    return 3 - dec.rank


# --- cocycles ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Cocycle:
    base: Representation
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).reshape(self.base.generator_count, 3)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def vector(self):
        return self.values.ravel()

    @property
    def defect(self):
        """||cocycle_matrix @ c||, the failure of the relator conditions."""
        M = cocycle_matrix(self.base)
        return float(np.linalg.norm(M @ self.vector)) if M.size else 0.0

    def check(self, tol=COC_TOL):
        norm = np.linalg.norm(self.vector)
        if self.defect > tol * max(norm, 1e-300) and self.defect > 0:
            raise CohomologyError(f"cocycle defect {self.defect:.3g} exceeds {tol:g} x norm")
        return self

    def on_word(self, w):
        return cochain_on_word(self.base, self.values, w)


def coboundary(rho: Representation, X) -> Cocycle:
    return Cocycle(rho, coboundary_matrix(rho) @ np.asarray(X, dtype=complex))


def kodaira_spencer_class(c: Cocycle, report: Optional[CohomologyReport] = None) -> np.ndarray:
    """Coordinates of the class of ``c`` in H1 (the projection Z1 -> H1).

    The report's H1 basis is reused when it was computed for the same base
    point; otherwise the report is recomputed.
    """
    if report is None or not report.base.same_point(c.base):
        report = cohomology_report(c.base)
    return report.h1_basis.conj().T @ c.vector


def slice_basis(rho: Representation, report: Optional[CohomologyReport] = None) -> List[Cocycle]:
    """Orthonormal cocycles spanning a complement of B1 in Z1."""
    if report is None:
        report = cohomology_report(rho)
    return [Cocycle(rho, report.h1_basis[:, k]) for k in range(report.dim_H1)]


def path_to_cocycle(path: Callable[[float], Representation], rho: Representation,
                    h: float = 1e-3, path_tol: float = 1e-8,
                    defect_tol: Optional[float] = None) -> Cocycle:
    """Cocycle of a path of representations through ``rho`` at t = 0.

    c(g_i) = (rho_h(g_i) - rho_{-h}(g_i)) / (2h) rho(g_i)^{-1}, projected to
    its traceless part.  The central difference makes the cocycle defect
    O(h^2); ``defect_tol`` defaults to COC_TOL + h.
    """
    plus, minus = path(h), path(-h)
    for sample in (plus, minus):
        if sample.residual > path_tol:
            raise CohomologyError(f"path sample off the variety (residual {sample.residual:.3g})")
    values = []
    for gp, gm, g in zip(plus.images, minus.images, rho.images):
        values.append(linalg2.matrix_to_vec((gp - gm) / (2 * h) @ linalg2.inv(g)))
    c = Cocycle(rho, np.array(values))
    tol = COC_TOL + h if defect_tol is None else defect_tol
    if c.defect > tol:
        raise CohomologyError(f"path cocycle defect {c.defect:.3g} exceeds {tol:g}")
    return c


# --- Luna slice hypothesis --------------------------------------------------


def luna_hypothesis_check(rho: Representation, generator: int = 1, tol: float = 1e-9):
    """Is rho(g_generator) semisimple?

    True when tr != +-2 or the image is +-I.  The diagnostic also records
    the first Betti number and whether the generator maps to a generator
    of the free part, which frames the slice statement for b1 = 1.
    """
    P: Presentation = rho.presentation
    g = rho.images[generator - 1]
    tr = complex(np.trace(g))
    dist_center = min(np.linalg.norm(g - np.eye(2)), np.linalg.norm(g + np.eye(2)))
    # a non-semisimple element of SL2 has a repeated eigenvalue, i.e. tr = +-2
    semisimple = min(abs(tr - 2), abs(tr + 2)) > tol or dist_center <= tol
    ab = abelianization(P)
    maps_to_generator = None
    if ab.rank_free == 1:
        # image of g in Z^n / rows, projected to the free coordinate of the SNF basis
        V = ab.column_transform
        Vinv = np.array(np.round(np.linalg.inv(np.array(V, dtype=float))), dtype=int)
        coords = Vinv[:, generator - 1]
        free_coord = int(coords[-1])
        maps_to_generator = abs(free_coord) == 1
    return semisimple, {
        "trace": tr,
        "distance_to_center": float(dist_center),
        "b1": ab.rank_free,
        "maps_to_free_generator": maps_to_generator,
    }
