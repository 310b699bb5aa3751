"""Coreset distortion and k-means solution quality."""
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from dyncoreset.core import cost
from dyncoreset.seeding import kmeanspp


@dataclass
class EvalReport:
    distortion: float
    quality: float
    solution_costs: List[Tuple[float, float]] = field(default_factory=list)


def _ratio_distortion(on_x, on_c):
    if on_x == 0.0 and on_c == 0.0:
        return 0.0
    if on_x == 0.0 or on_c == 0.0:
        return math.inf
    return max(on_x / on_c, on_c / on_x) - 1.0


def _split(data):
    """Accept a Coreset, a Dataset, or an (X, weights) pair."""
    if isinstance(data, tuple):
        X, w = data
        return np.asarray(X, dtype=np.float64), None if w is None else np.asarray(w)
    if hasattr(data, "points"):
        return data.points, data.weights
    return np.asarray(data, dtype=np.float64), None


def distortion(C, X, solutions: Sequence[np.ndarray]) -> float:
    """max over solutions of max(cost_X/cost_C, cost_C/cost_X) - 1.

    A solution that costs zero on exactly one side yields +inf.
    """
    return distortion_detail(C, X, solutions)[0]


def distortion_detail(C, X, solutions):
    CX, Cw = _split(C)
    XX, Xw = _split(X)
    pairs = []
    worst = 0.0
    for S in solutions:
        on_x = cost(S, XX, Xw)
        on_c = cost(S, CX, Cw)
        pairs.append((on_x, on_c))
        worst = max(worst, _ratio_distortion(on_x, on_c))
    return worst, pairs


def default_solutions(C, X, k, seed=0):
    """k-means++ on the coreset and k-means++ on the full data."""
    CX, Cw = _split(C)
    XX, Xw = _split(X)
    return [kmeanspp(CX, Cw, k, np.random.default_rng(seed)),
            kmeanspp(XX, Xw, k, np.random.default_rng(seed))]


def quality_ratio(full_solution_cost, coreset_solution_cost):
    if full_solution_cost == 0.0 and coreset_solution_cost == 0.0:
        return 1.0
    if coreset_solution_cost == 0.0:
        return math.inf
    return full_solution_cost / coreset_solution_cost


def quality(C, X, k, seed=0) -> float:
    """cost(S_X, X) / cost(S_C, X) with both solutions from k-means++.

    Both runs use a generator seeded with `seed`; values above 1 are kept.
    """
    CX, Cw = _split(C)
    XX, Xw = _split(X)
    S_C = kmeanspp(CX, Cw, k, np.random.default_rng(seed))
    S_X = kmeanspp(XX, Xw, k, np.random.default_rng(seed))
    return quality_ratio(cost(S_X, XX, Xw), cost(S_C, XX, Xw))


def evaluate(C, X, k, seed=0, solution=None) -> EvalReport:
    """Distortion over the default solution set plus quality.

    `solution`, when given, is used as the coreset-derived solution S_C
    instead of a fresh k-means++ run on C.
    """
    CX, Cw = _split(C)
    XX, Xw = _split(X)
    S_X = kmeanspp(XX, Xw, k, np.random.default_rng(seed))
    if solution is None:
        solution = kmeanspp(CX, Cw, k, np.random.default_rng(seed))
    d, pairs = distortion_detail((CX, Cw), (XX, Xw), [solution, S_X])
    q = quality_ratio(pairs[1][0], pairs[0][0])
    return EvalReport(d, q, pairs)
