"""Admissibility of the twisted action x -> rho(g)^{-1} x g.

Two exact arguments are available: a representation conjugate to the
defining embedding fixes a point of SL2(C) (the action is not free), and a
representation preserving a positive Hermitian form has relatively compact
image (admissible for a cocompact lattice).  Everything else rests on a
finite scan of the Cartan drift mu(g) - mu(rho(g)) over a ball of the
group, which can only suggest the answer.
"""

import enum
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import linalg2
from .presentation import DEFAULT_BALL_BUDGET, Presentation, enumerate_ball
from .repvar import Representation, intertwiner_between
from .serialize import encode_matrix

DRIFT_SLOPE_FLOOR = 0.1


@dataclass(frozen=True)
class DriftReport:
    lengths: List[int]
    min_drift: List[float]
    mean_drift: List[float]
    element_counts: List[int]

    def to_json(self):
        return {
            "lengths": list(self.lengths),
            "min_drift": list(self.min_drift),
            "mean_drift": list(self.mean_drift),
            "element_counts": list(self.element_counts),
        }


_BALL_CACHE = {}
_BALL_CACHE_SIZE = 8


def _reference_ball(P, rho_ref, L, budget):
    """enumerate_ball for the reference, memoized on the exact image data."""
    key = (P, tuple(g.tobytes() for g in rho_ref.images), L, budget)
    ball = _BALL_CACHE.get(key)
    if ball is None:
        ball = enumerate_ball(P, rho_ref, L, budget)
        if len(_BALL_CACHE) >= _BALL_CACHE_SIZE:
            _BALL_CACHE.pop(next(iter(_BALL_CACHE)))
        _BALL_CACHE[key] = ball
    return ball


def drift_scan(P: Presentation, rho_ref: Representation, rho: Representation, L: int,
               budget: int = DEFAULT_BALL_BUDGET) -> DriftReport:
    """Per word length 1..L, min and mean of mu(g_ref) - mu(rho(g)).

    Elements are grouped by the length of their shortest word (the sphere
    of radius l in the word metric).
    """
    if rho.generator_count != P.generator_count or rho_ref.generator_count != P.generator_count:
        raise ValueError("representations do not match the presentation")
    by_length = {l: [] for l in range(1, L + 1)}
    for w, g_ref in _reference_ball(P, rho_ref, L, budget):
        if w:
            by_length[len(w)].append(linalg2.cartan_mu(g_ref) - linalg2.cartan_mu(rho.image(w)))
    lengths = list(range(1, L + 1))
    mins = [min(by_length[l]) if by_length[l] else float("nan") for l in lengths]
    means = [float(np.mean(by_length[l])) if by_length[l] else float("nan") for l in lengths]
    counts = [len(by_length[l]) for l in lengths]
    return DriftReport(lengths, mins, means, counts)


class VerdictKind(enum.Enum):
    ADMISSIBLE_CERTIFIED = "AdmissibleCertified"
    LIKELY_ADMISSIBLE = "LikelyAdmissible"
    NOT_ADMISSIBLE_CERTIFIED = "NotAdmissibleCertified"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    rationale: str
    certificate: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    drift: Optional[DriftReport] = field(default=None, compare=False)

    def to_json(self):
        out = {"verdict": self.kind.value, "rationale": self.rationale}
        if self.certificate is not None:
            key = "hermitian_form" if self.kind is VerdictKind.ADMISSIBLE_CERTIFIED else "intertwiner"
            out[key] = encode_matrix(self.certificate)
        if self.drift is not None:
            out["drift"] = self.drift.to_json()
        return out


def _slope(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2:
        return 0.0
    return float(np.polyfit(xs, ys, 1)[0])


def admissibility_verdict(P: Presentation, rho_ref: Representation, rho: Representation,
                          L: int = 6, slope_floor: float = DRIFT_SLOPE_FLOOR,
                          budget: int = DEFAULT_BALL_BUDGET) -> Verdict:
    """Classify ``rho`` against the defining embedding ``rho_ref``.

    1. rho conjugate to rho_ref: x = X fixes every twisted translate, so
       the action is not free -> NotAdmissibleCertified.
    2. rho(G) preserves a positive Hermitian form -> AdmissibleCertified.
    3. min drift at length L >= slope_floor * L and the drift grows over
       lengths 3..L -> LikelyAdmissible.
    4. otherwise Inconclusive, with the drift report attached.
    """
    X = intertwiner_between(rho_ref, rho)
    if X is not None:
        return Verdict(VerdictKind.NOT_ADMISSIBLE_CERTIFIED,
                       "conjugate to the defining embedding; the intertwiner is a fixed point",
                       certificate=X)
    Hm = linalg2.invariant_hermitian_form(rho.images)
    if Hm is not None:
        return Verdict(VerdictKind.ADMISSIBLE_CERTIFIED,
                       "image preserves a positive Hermitian form (relatively compact)",
                       certificate=Hm)
    report = drift_scan(P, rho_ref, rho, L, budget)
    fit_from = 3 if L >= 4 else 1
    xs = [l for l in report.lengths if l >= fit_from]
    ys = [report.min_drift[l - 1] for l in xs]
    slope = _slope(xs, ys)
    if report.min_drift[-1] >= slope_floor * L and slope > 0:
        return Verdict(VerdictKind.LIKELY_ADMISSIBLE,
                       f"min drift {report.min_drift[-1]:.4g} at length {L} "
                       f">= {slope_floor:g} * {L}, fitted slope {slope:.3g}",
                       drift=report)
    return Verdict(VerdictKind.INCONCLUSIVE,
                   f"min drift {report.min_drift[-1]:.4g} at length {L}, fitted slope {slope:.3g}",
                   drift=report)
