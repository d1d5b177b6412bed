"""Points of the representation variety Hom(G, SL2(C)).

A :class:`Representation` stores one SL2 matrix per generator together with
its relator residual.  This module evaluates words, refines approximate
points by Gauss-Newton, enumerates the representations that factor through
a finite abelianization, and carries the built-in Weeks manifold data.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import linalg2
from .errors import ContinuousFamilyError, ConvergenceError, RepresentationError
from .presentation import (
    Presentation,
    Word,
    abelianization,
    exponent_sum_matrix,
    fox_jacobian,
    parse_presentation,
    smith_normal_form,
)
from .serialize import decode_matrix, encode_matrix

log = logging.getLogger(__name__)

REP_TOL = 1e-9

WEEKS_TEXT = "a, b | a^2 b^2 a^2 B a B, a^2 b^2 A b A b^2"
# 1 + 2x^2 - x^3 + 2x^4 + x^6, highest degree first
WEEKS_SEXTIC = (1, 0, 2, -1, 2, 0, 1)


def _freeze(g):
    g = np.array(g, dtype=complex)
    g.setflags(write=False)
    return g


def _word_product(images, inverses, w):
    out = linalg2.identity()
    for x in w:
        out = out @ (images[x - 1] if x > 0 else inverses[-x - 1])
    return out


def _relator_residual(P, images):
    inverses = [linalg2.inv(g) for g in images]
    worst = 0.0
    for r in P.relators:
        worst = max(worst, float(np.linalg.norm(_word_product(images, inverses, r) - np.eye(2))))
    return worst


@dataclass(frozen=True, eq=False)
class Representation:
    presentation: Presentation
    images: Tuple[np.ndarray, ...]
    residual: float = field(init=False)

    def __post_init__(self):
        imgs = tuple(_freeze(linalg2.as_sl2(g)) for g in self.images)
        if len(imgs) != self.presentation.generator_count:
            raise RepresentationError(
                f"{len(imgs)} images for {self.presentation.generator_count} generators")
        object.__setattr__(self, "images", imgs)
        object.__setattr__(self, "_inverses", tuple(_freeze(linalg2.inv(g)) for g in imgs))
        object.__setattr__(self, "residual", _relator_residual(self.presentation, imgs))

    @property
    def generator_count(self):
        return len(self.images)

    def image(self, w: Sequence[int]) -> np.ndarray:
        return _word_product(self.images, self._inverses, w)

    def on_variety(self, tol=REP_TOL):
        return self.residual <= tol

    def same_point(self, other, tol=0.0):
        return (self.presentation == other.presentation and all(
            np.max(np.abs(g - h)) <= tol for g, h in zip(self.images, other.images)))

    def to_json(self):
        return {
            "presentation": self.presentation.to_text(),
            "images": [encode_matrix(g) for g in self.images],
            "residual": self.residual,
        }

    @classmethod
    def from_json(cls, data, presentation=None):
        P = presentation or parse_presentation(data["presentation"])
        return cls(P, tuple(decode_matrix(m) for m in data["images"]))


def trivial_representation(P: Presentation) -> Representation:
    return Representation(P, tuple(linalg2.identity() for _ in range(P.generator_count)))


def evaluate_word(rho: Representation, w: Sequence[int]) -> np.ndarray:
    return rho.image(w)


def relator_residual(rho: Representation) -> float:
    return rho.residual


# --- Gauss-Newton -----------------------------------------------------------


def _system(P, fox, images):
    """Residual vector and complex Jacobian for relators and determinants.

    Unknowns are X_i in gl2 with g_i -> (I + X_i) g_i.  The first-order
    change of a relator value R is (sum_i rho(dR/dg_i) . X_i) R, where the
    Fox derivative is evaluated through conjugation.
    """
    n = len(images)
    # true inverses: iterates leave det = 1, where the adjugate would not match J
    inverses = [np.linalg.inv(g) for g in images]
    res, rows = [], []
    for r, fox_row in zip(P.relators, fox):
        R = _word_product(images, inverses, r)
        res.append((R - np.eye(2)).ravel())
        block = np.zeros((4, 4 * n), dtype=complex)
        for i, d in enumerate(fox_row):
            for c, u in d.terms:
                A = _word_product(images, inverses, u)
                B = np.linalg.solve(A, R)
                block[:, 4 * i:4 * i + 4] += c * np.kron(A, B.T)
        rows.append(block)
    for i, g in enumerate(images):
        res.append(np.array([linalg2.det(g) - 1]))
        row = np.zeros((1, 4 * n), dtype=complex)
        row[0, 4 * i] = row[0, 4 * i + 3] = linalg2.det(g)
        rows.append(row)
    return np.concatenate(res), np.vstack(rows)


def newton_refine(rho0: Representation, max_iter: int = 50, tol: float = 1e-13,
                  rep_tol: float = REP_TOL) -> Representation:
    """Pull an approximate representation onto the variety.

    Gauss-Newton on the relator defects and det(g_i) - 1, with the step
    halved up to 8 times whenever it would increase the residual.  Returns
    the input unchanged when it already meets ``tol``; raises
    :class:`ConvergenceError` when it stalls above ``rep_tol``.
    """
    P = rho0.presentation
    if rho0.residual <= tol or not P.relators:
        return rho0
    fox = fox_jacobian(P)
    images = [np.array(g) for g in rho0.images]
    r, J = _system(P, fox, images)
    merit = np.linalg.norm(r)
    for it in range(max_iter):
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[0] < 1e-14:
            raise ConvergenceError("Jacobian is numerically zero; normal equations singular")
        step = np.linalg.lstsq(J, -r, rcond=1e-12)[0]
        t = 1.0
        for _ in range(9):
            trial = [(np.eye(2) + t * step[4 * i:4 * i + 4].reshape(2, 2)) @ g
                     for i, g in enumerate(images)]
            try:
                r_new, J_new = _system(P, fox, trial)
            except np.linalg.LinAlgError:
                t /= 2
                continue
            if np.linalg.norm(r_new) < merit:
                break
            t /= 2
        else:
            break
        images, r, J, merit = trial, r_new, J_new, np.linalg.norm(r_new)
        if _relator_residual(P, images) <= tol:
            break
    images = [linalg2.normalize_det(g) for g in images]
    out = Representation(P, tuple(images))
    if out.residual > rho0.residual:
        out = rho0
    if out.residual > rep_tol:
        raise ConvergenceError(
            f"Gauss-Newton stalled at residual {out.residual:.3g} after {it + 1} iterations")
    return out


# --- abelian representations ------------------------------------------------


def abelian_representations(P: Presentation, dedupe_conjugate: bool = False) -> List[Representation]:
    """All diagonal representations through a finite abelianization.

    A character theta in (Q/Z)^n of the generators is admissible when every
    relator's exponent sum pairs to an integer with it.  With U M V = D the
    Smith form of the exponent-sum matrix, theta = V phi where phi_t ranges
    over multiples of 1/d_t.  Generator i is sent to diag(z_i, conj z_i),
    z_i = exp(2 pi i theta_i).

    With ``dedupe_conjugate`` a character and its inverse, which are
    conjugate through the Weyl element, are kept only once.
    """
    ab = abelianization(P)
    if ab.rank_free:
        raise ContinuousFamilyError(ab.rank_free)
    n = P.generator_count
    M = exponent_sum_matrix(P)
    D, _, V = smith_normal_form(M)
    diag = [int(D[t, t]) for t in range(n)]
    out, seen = [], set()
    for ks in itertools.product(*(range(d) for d in diag)):
        phi = [Fraction(k, d) for k, d in zip(ks, diag)]
        theta = tuple(sum((int(V[i, t]) * phi[t] for t in range(n)), Fraction(0)) % 1
                      for i in range(n))
        if dedupe_conjugate:
            if tuple((-x) % 1 for x in theta) in seen:
                continue
        seen.add(theta)
        images = []
        for x in theta:
            z = np.exp(2j * np.pi * float(x))
            images.append(np.array([[z, 0], [0, z.conjugate()]]))
        out.append(Representation(P, tuple(images)))
    return out


# --- Weeks manifold ---------------------------------------------------------


def weeks_presentation() -> Presentation:
    return parse_presentation(WEEKS_TEXT)


def _polish_root(coeffs, x, iters=30):
    p = np.poly1d(coeffs)
    dp = p.deriv()
    for _ in range(iters):
        step = p(x) / dp(x)
        x = x - step
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return complex(x)


def weeks_sextic_roots() -> List[complex]:
    """Roots of 1 + 2x^2 - x^3 + 2x^4 + x^6, Newton-polished and sorted by (Re, Im)."""
    roots = [_polish_root(WEEKS_SEXTIC, complex(z)) for z in np.roots(WEEKS_SEXTIC)]
    return sorted(roots, key=lambda z: (round(z.real, 9), z.imag))


def weeks_geometric(root_index: int = 0) -> Representation:
    """The representation a -> [[x, 1], [0, 1/x]], b -> [[x, 0], [r, 1/x]].

    ``x`` is the selected sextic root and r = 2 - x - 1/x.  Roots 0-3 give
    the discrete faithful embedding (up to conjugation and complex
    conjugation); roots 4 and 5 lie on the unit circle and give Galois
    conjugates with bounded image.
    """
    roots = weeks_sextic_roots()
    if not 0 <= root_index < len(roots):
        raise RepresentationError(f"root index must be in 0..{len(roots) - 1}")
    x = roots[root_index]
    r = 2 - x - 1 / x
    A = np.array([[x, 1], [0, 1 / x]])
    B = np.array([[x, 0], [r, 1 / x]])
    return newton_refine(Representation(weeks_presentation(), (A, B)))


def weeks_abelian(n: int, m: int) -> Representation:
    """rho_{n,m}: a -> diag(w_m, 1/w_m), b -> diag(w_n, 1/w_n), w_k = exp(2 pi i k / 5)."""
    za = np.exp(2j * np.pi * m / 5)
    zb = np.exp(2j * np.pi * n / 5)
    return Representation(weeks_presentation(), (
        np.array([[za, 0], [0, za.conjugate()]]),
        np.array([[zb, 0], [0, zb.conjugate()]]),
    ))


# --- conjugation and characters ---------------------------------------------


def conjugate_representation(rho: Representation, g) -> Representation:
    g = linalg2.as_sl2(g)
    gi = linalg2.inv(g)
    return Representation(rho.presentation, tuple(g @ h @ gi for h in rho.images))


@dataclass(frozen=True)
class CharacterSample:
    words: Tuple[Word, ...]
    traces: Tuple[complex, ...]

    def __post_init__(self):
        if len(self.words) != len(self.traces):
            raise ValueError("words and traces differ in length")


def character_sample(rho: Representation, words: Sequence[Sequence[int]]) -> CharacterSample:
    words = tuple(tuple(w) for w in words)
    return CharacterSample(words, tuple(complex(np.trace(rho.image(w))) for w in words))


def characters_equal(s1: CharacterSample, s2: CharacterSample, tol: float = 1e-9) -> bool:
    if s1.words != s2.words:
        raise ValueError("character samples were taken on different words")
    return all(abs(a - b) <= tol for a, b in zip(s1.traces, s2.traces))


def intertwiner_between(rho: Representation, eta: Representation,
                        tol: float = 1e-8) -> Optional[np.ndarray]:
    """An SL2 matrix X with X rho(g_i) X^{-1} = eta(g_i) for all i, or None.

    The equations X rho_i = eta_i X are linear in X.  Their solution space
    is found by SVD and searched for an invertible element.
    """
    if rho.generator_count != eta.generator_count:
        raise RepresentationError("representations of different groups")
    I2 = np.eye(2)
    # row-major vec: vec(X A) = (I kron A^T) vec X, vec(B X) = (B kron I) vec X
    A = np.vstack([np.kron(I2, r.T) - np.kron(e, I2) for r, e in zip(rho.images, eta.images)])
    _, s, vh = np.linalg.svd(A)
    scale = max(1.0, max(np.linalg.norm(g) for g in rho.images + eta.images))
    null = vh[np.sum(s > 1e-9 * scale):].conj()
    if null.shape[0] == 0:
        return None
    rng = np.random.default_rng(0)
    trials = list(null)
    if null.shape[0] > 1:
        trials += [c @ null for c in rng.normal(size=(8, null.shape[0]))
                   + 1j * rng.normal(size=(8, null.shape[0]))]
    best, best_score = None, 0.0
    for v in trials:
        X = v.reshape(2, 2)
        score = abs(linalg2.det(X)) / np.linalg.norm(X) ** 2
        if score > best_score:
            best, best_score = X, score
    if best is None or best_score < 1e-8:
        return None
    X = linalg2.normalize_det(best)
    Xi = linalg2.inv(X)
    err = max(np.linalg.norm(X @ r @ Xi - e) for r, e in zip(rho.images, eta.images))
    if err > tol * scale * max(1.0, np.linalg.norm(X) ** 2):
        return None
    return X
