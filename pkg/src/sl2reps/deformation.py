"""Order-by-order deformations rho_k = exp(c_1 t + ... + c_k t^k) rho.

Matrices with entries in C[t]/(t^{N+1}) are stored as ``(N+1, 2, 2)``
coefficient arrays.  A deformation extends from order k to k+1 exactly when
the order-(k+1) relator defects lie in the image of the cocycle matrix.
"""

from dataclasses import dataclass
from math import factorial
from typing import List, Optional

import numpy as np

from . import linalg2
from .cohomology import Cocycle, cocycle_matrix, cohomology_report, numerical_rank, RANK_TOL
from .errors import ConvergenceError, DeformationError
from .repvar import REP_TOL, Representation, newton_refine
from .serialize import encode_vector

JET_TOL = 1e-8
DEFAULT_ORDER = 6


@dataclass(frozen=True, eq=False)
class Jet:
    """Truncated power series c_0 + c_1 t + ... + c_N t^N."""

    coefficients: np.ndarray

    @property
    def order(self):
        return len(self.coefficients) - 1

    def __mul__(self, other):
        N = self.order
        out = np.zeros(N + 1, dtype=complex)
        for k in range(N + 1):
            out[k] = np.dot(self.coefficients[:k + 1], other.coefficients[k::-1])
        return Jet(out)


@dataclass(frozen=True, eq=False)
class MatrixJet:
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 3 or c.shape[1:] != (2, 2):
            raise ValueError("a matrix jet needs shape (N+1, 2, 2)")
        object.__setattr__(self, "coefficients", c)

    @property
    def order(self):
        return self.coefficients.shape[0] - 1

    @classmethod
    def constant(cls, M, order):
        c = np.zeros((order + 1, 2, 2), dtype=complex)
        c[0] = M
        return cls(c)

    @classmethod
    def identity(cls, order):
        return cls.constant(np.eye(2), order)

    def __getitem__(self, k):
        return self.coefficients[k]

    def __matmul__(self, other):
        return jet_mul(self, other)

    def __add__(self, other):
        return MatrixJet(self.coefficients + other.coefficients)

    def __sub__(self, other):
        return MatrixJet(self.coefficients - other.coefficients)

    def det(self) -> Jet:
        c = self.coefficients
        a, b, cc, d = (Jet(c[:, 0, 0]), Jet(c[:, 0, 1]), Jet(c[:, 1, 0]), Jet(c[:, 1, 1]))
        return Jet((a * d).coefficients - (b * cc).coefficients)


def jet_mul(A: MatrixJet, B: MatrixJet) -> MatrixJet:
    if A.order != B.order:
        raise DeformationError(f"jet orders differ ({A.order} vs {B.order})")
    N = A.order
    a, b = A.coefficients, B.coefficients
    out = np.zeros_like(a)
    for k in range(N + 1):
        for j in range(k + 1):
            out[k] += a[j] @ b[k - j]
    return MatrixJet(out)


def jet_inv(A: MatrixJet) -> MatrixJet:
    """Inverse by the recursion B_0 = A_0^{-1}, B_k = -A_0^{-1} sum_{j>=1} A_j B_{k-j}."""
    a = A.coefficients
    d0 = a[0, 0, 0] * a[0, 1, 1] - a[0, 0, 1] * a[0, 1, 0]
    if abs(d0) < 1e-14 * max(1.0, np.linalg.norm(a[0]) ** 2):
        raise DeformationError("constant term of the jet is singular")
    a0inv = np.linalg.inv(a[0])
    out = np.zeros_like(a)
    out[0] = a0inv
    for k in range(1, A.order + 1):
        acc = np.zeros((2, 2), dtype=complex)
        for j in range(1, k + 1):
            acc += a[j] @ out[k - j]
        out[k] = -a0inv @ acc
    return MatrixJet(out)


def exp_jet(X: MatrixJet) -> MatrixJet:
    """sum_{j <= N} X^j / j!; finite because X has no constant term."""
    if np.any(X.coefficients[0] != 0):
        raise DeformationError("exp_jet needs a jet with zero constant term")
    N = X.order
    out = MatrixJet.identity(N)
    power = MatrixJet.identity(N)
    for j in range(1, N + 1):
        power = power @ X
        out = out + MatrixJet(power.coefficients / factorial(j))
    return out


# --- deformation jets -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DeformationJet:
    """Cochains c_1..c_k (each an (n, 3) array of generator values) at ``base``."""

    base: Representation
    cochains: np.ndarray

    def __post_init__(self):
        n = self.base.generator_count
        c = np.array(self.cochains, dtype=complex).reshape(-1, n, 3)
        c.setflags(write=False)
        object.__setattr__(self, "cochains", c)

    @property
    def order(self):
        return self.cochains.shape[0]

    @classmethod
    def first_order(cls, c: Cocycle):
        return cls(c.base, c.values[None])

    def extended(self, c_next) -> "DeformationJet":
        c_next = np.asarray(c_next, dtype=complex).reshape(1, self.base.generator_count, 3)
        return DeformationJet(self.base, np.concatenate([self.cochains, c_next]))

    def defect_norms(self, order=None):
        """Per-order max over relators of the defect coefficient norm."""
        N = self.order if order is None else order
        P = self.base.presentation
        norms = np.zeros(N + 1)
        for r in P.relators:
            d = relator_defect_jet(self, r, N)
            norms = np.maximum(norms, np.linalg.norm(d.coefficients, axis=(1, 2)))
        return norms

    def validate(self, jet_tol=JET_TOL):
        norms = self.defect_norms()
        bad = [k for k in range(1, self.order + 1) if norms[k] > jet_tol]
        if bad or norms[0] > REP_TOL:
            raise DeformationError(
                f"deformation is not valid through order {self.order}: "
                f"defects {np.array2string(norms, precision=3)}")
        return self

    def to_json(self):
        return {
            "base": self.base.to_json(),
            "order": self.order,
            "cochains": [[encode_vector(v) for v in c] for c in self.cochains],
        }


def deformed_generator_jets(D: DeformationJet, order: Optional[int] = None) -> List[MatrixJet]:
    """exp(sum_j c_j(g_i) t^j) rho(g_i) for each generator, truncated at ``order``."""
    N = D.order if order is None else order
    out = []
    for i, g in enumerate(D.base.images):
        X = np.zeros((N + 1, 2, 2), dtype=complex)
        for j in range(1, min(D.order, N) + 1):
            X[j] = linalg2.vec_to_matrix(D.cochains[j - 1, i])
        out.append(exp_jet(MatrixJet(X)) @ MatrixJet.constant(g, N))
    return out


def _evaluate_jets(gen_jets, inv_jets, w, N):
    out = MatrixJet.identity(N)
    for x in w:
        out = out @ (gen_jets[x - 1] if x > 0 else inv_jets[-x - 1])
    return out


def relator_defect_jet(D: DeformationJet, R, order: Optional[int] = None) -> MatrixJet:
    """R evaluated on the generator jets, minus the identity."""
    N = D.order if order is None else order
    gens = deformed_generator_jets(D, N)
    invs = [jet_inv(g) for g in gens]
    return _evaluate_jets(gens, invs, R, N) - MatrixJet.identity(N)


def _defect_coefficients(D: DeformationJet, k: int, jet_tol: float):
    """sl2 coordinates of the order-k relator defects, stacked relator-major."""
    gens = deformed_generator_jets(D, k)
    invs = [jet_inv(g) for g in gens]
    out = []
    for r in D.base.presentation.relators:
        O = (_evaluate_jets(gens, invs, r, k) - MatrixJet.identity(k))[k]
        tr = O[0, 0] + O[1, 1]
        if abs(tr) > jet_tol * (1 + np.linalg.norm(O)):
            raise DeformationError(
                f"order-{k} defect has trace {abs(tr):.3g}; the input jet is not valid")
        out.append(linalg2.matrix_to_vec(O))
    return np.concatenate(out) if out else np.zeros(0, dtype=complex)


def obstruction_vector(D: DeformationJet, jet_tol: float = JET_TOL) -> np.ndarray:
    """Order-(k+1) coefficients of all relator defects in sl2 coordinates (length 3m)."""
    return _defect_coefficients(D, D.order + 1, jet_tol)


def first_order_defect_operator(rho: Representation) -> np.ndarray:
    """Matrix of c_1 -> order-1 relator defects, built column by column from jets.

    On the variety this is the cocycle matrix; the two are computed by
    unrelated routes (jet arithmetic vs Fox calculus).
    """
    n, m = rho.generator_count, rho.presentation.relator_count
    cols = []
    for k in range(3 * n):
        e = np.zeros(3 * n, dtype=complex)
        e[k] = 1
        D = DeformationJet(rho, e[None])
        cols.append(_defect_coefficients(D, 1, np.inf))
    return np.column_stack(cols) if m else np.zeros((0, 3 * n), dtype=complex)


def _min_norm_solve(M, b, rank_tol=RANK_TOL):
    dec, _, _ = numerical_rank(M, rank_tol, "cocycle matrix")
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    r = dec.rank
    return vh[:r].conj().T @ ((u[:, :r].conj().T @ b) / s[:r])


def extend_deformation(D: DeformationJet, jet_tol: float = JET_TOL) -> Optional[np.ndarray]:
    """Next cochain c_{k+1} as an (n, 3) array, or None when obstructed.

    Solves cocycle_matrix @ c = -obstruction in the minimum-norm least
    squares sense and accepts when the residual is below
    jet_tol * (1 + |obstruction|).
    """
    n = D.base.generator_count
    ob = obstruction_vector(D, jet_tol)
    if ob.size == 0:
        return np.zeros((n, 3), dtype=complex)
    M = cocycle_matrix(D.base)
    c = _min_norm_solve(M, -ob)
    if np.linalg.norm(M @ c + ob) >= jet_tol * (1 + np.linalg.norm(ob)):
        return None
    return c.reshape(n, 3)


def extend_to_order(c1: Cocycle, order: int, jet_tol: float = JET_TOL):
    """Extend a first-order deformation as far as ``order``.

    Returns ``(jet, obstruction_norms)``; the jet stops early at the first
    obstructed order, and obstruction_norms[j] is the norm of the defect met
    when going from order j+1 to j+2.
    """
    D = DeformationJet.first_order(c1)
    norms = []
    while D.order < order:
        ob = obstruction_vector(D, jet_tol)
        norms.append(float(np.linalg.norm(ob)) if ob.size else 0.0)
        nxt = extend_deformation(D, jet_tol)
        if nxt is None:
            break
        D = D.extended(nxt)
    return D, norms


# --- continuation -----------------------------------------------------------


def integrate_curve(rho: Representation, c: Cocycle, h: float = 0.05, steps: int = 10,
                    rep_tol: float = REP_TOL) -> List[Representation]:
    """Follow the direction ``c`` from ``rho`` by predictor-corrector steps.

    Predictor g_i <- exp(h c(g_i)) g_i, corrector Gauss-Newton.  Returns
    [rho, rho_1, ..., rho_steps]; a corrector stall raises with the step
    index.
    """
    report = cohomology_report(rho)
    if report.dim_Z1 == 0:
        raise DeformationError("Z1 = 0 at this point: only the zero cocycle exists (rigid)")
    c.check()
    path = [rho]
    current = rho
    for step in range(1, steps + 1):
        images = tuple(linalg2.exp_traceless(h * v) @ g for v, g in zip(c.values, current.images))
        predicted = Representation(rho.presentation, images)
        try:
            current = newton_refine(predicted, rep_tol=rep_tol)
        except ConvergenceError as exc:
            raise DeformationError(f"corrector stalled at step {step}: {exc}") from exc
        path.append(current)
    return path
