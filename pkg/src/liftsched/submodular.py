"""Set-function machinery for hall-call assignment.

The ground set holds one element per (call, car) pair. Assignment quality
is the negated waiting-time estimate plus a per-call feasibility penalty
whose constant offset makes the objective vanish on the empty set; the
partition matroid (one block per call, capacity one) keeps every call on
at most one car, and the penalty makes complete assignments dominate
partial ones. Maximization is plain greedy with a deterministic
tie-break; a brute-force enumerator over complete assignments serves as
the test oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator

import numpy as np

from .waiting_model import WeightSet


@dataclass(frozen=True, order=True)
class GroundElement:
    """Assignment atom: hall call `call_id` rides car `car` (both 0-based)."""

    call_id: int
    car: int


class AssignmentSet:
    """An immutable subset of the ground set."""

    __slots__ = ("elements",)

    def __init__(self, elements: Iterable[GroundElement] = ()):
        object.__setattr__(self, "elements", frozenset(elements))

    def __setattr__(self, *_):
        raise AttributeError("AssignmentSet is immutable")

    def __iter__(self) -> Iterator[GroundElement]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, e: GroundElement) -> bool:
        return e in self.elements

    def __eq__(self, other) -> bool:
        return isinstance(other, AssignmentSet) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        pairs = sorted((e.call_id, e.car) for e in self.elements)
        return f"AssignmentSet({pairs})"

    def add(self, e: GroundElement) -> "AssignmentSet":
        return AssignmentSet(self.elements | {e})

    def car_of(self) -> dict[int, int]:
        """call index -> car index; raises if a call appears twice."""
        out: dict[int, int] = {}
        for e in self.elements:
            if e.call_id in out:
                raise ValueError(f"call {e.call_id} assigned to two cars")
            out[e.call_id] = e.car
        return out

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "AssignmentSet":
        return cls(GroundElement(i, c) for i, c in pairs)


@dataclass(frozen=True)
class PartitionMatroid:
    """Blocks E_i = {(i, c) : c}, one per call, with per-block capacities."""

    n_calls: int
    n_cars: int
    capacities: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.n_calls < 1 or self.n_cars < 1:
            raise ValueError("matroid needs at least one call and one car")
        if not self.capacities:
            object.__setattr__(self, "capacities", (1,) * self.n_calls)
        elif len(self.capacities) != self.n_calls:
            raise ValueError("one capacity per block required")
        elif any(k < 1 for k in self.capacities):
            raise ValueError("block capacities must be positive")

    def ground_set(self) -> list[GroundElement]:
        return [GroundElement(i, c)
                for i in range(self.n_calls) for c in range(self.n_cars)]

    def is_independent(self, assignment: AssignmentSet) -> bool:
        counts = [0] * self.n_calls
        for e in assignment:
            if not (0 <= e.call_id < self.n_calls and 0 <= e.car < self.n_cars):
                return False
            counts[e.call_id] += 1
            if counts[e.call_id] > self.capacities[e.call_id]:
                return False
        return True


def is_independent(assignment: AssignmentSet, matroid: PartitionMatroid) -> bool:
    return matroid.is_independent(assignment)


class Objective:
    """f(A) = -g(A) - sum_i p_i (C - |A ∩ E_i|) + C * sum_i p_i over a WeightSet."""

    def __init__(self, weights: WeightSet):
        self.weights = weights
        self._unary = weights.unary.tolist()
        self._pairwise = weights.pairwise.tolist()
        self._penalties = weights.penalties.tolist()
        self._ho_by_car_call: dict[tuple[int, int], list[tuple[frozenset, float]]] = {}
        for term in weights.higher_order:
            for i in term.calls:
                rest = term.calls - {i}
                self._ho_by_car_call.setdefault((term.car, i), []).append(
                    (rest, term.penalty))

    @property
    def n_calls(self) -> int:
        return self.weights.n_calls

    @property
    def n_cars(self) -> int:
        return self.weights.n_cars

    def g_value(self, assignment: AssignmentSet) -> float:
        """Estimated total waiting time of the (partial) assignment."""
        total = 0.0
        by_car: dict[int, list[int]] = {}
        for e in assignment:
            total += self._unary[e.call_id][e.car]
            by_car.setdefault(e.car, []).append(e.call_id)
        pw = self._pairwise
        for car, ids in by_car.items():
            if len(ids) > 1:
                for a in range(len(ids)):
                    row = pw[ids[a]]
                    for b in range(a + 1, len(ids)):
                        total += row[ids[b]][car]
        for term in self.weights.higher_order:
            members = by_car.get(term.car)
            if members and term.calls.issubset(members):
                total += term.penalty
        return total

    def h_value(self, assignment: AssignmentSet) -> float:
        return -self.g_value(assignment)

    def h1_value(self, assignment: AssignmentSet) -> float:
        picked = sum(self._penalties[e.call_id] for e in assignment)
        return picked - self.weights.offset

    def f_value(self, assignment: AssignmentSet) -> float:
        # algebraically h + h1 + offset; written so f(empty) is exactly zero
        picked = sum(self._penalties[e.call_id] for e in assignment)
        return picked - self.g_value(assignment)

    def marginal_gain(self, by_car: dict[int, list[int]], e: GroundElement) -> float:
        """f(A + e) - f(A) given A's per-car call lists."""
        gain = self._penalties[e.call_id] - self._unary[e.call_id][e.car]
        members = by_car.get(e.car)
        if members:
            row = self._pairwise[e.call_id]
            for j in members:
                gain -= row[j][e.car]
            terms = self._ho_by_car_call.get((e.car, e.call_id))
            if terms:
                present = set(members)
                for rest, penalty in terms:
                    if rest <= present:
                        gain -= penalty
        return gain


@dataclass
class GreedyTrace:
    """Greedy run record: the picks in order and the evaluation count."""

    assignment: AssignmentSet
    picks: list[tuple[GroundElement, float]] = field(default_factory=list)
    evaluations: int = 0


def greedy_maximize_trace(objective: Objective, matroid: PartitionMatroid,
                          fixed: AssignmentSet | None = None,
                          forbidden: Iterable[GroundElement] = ()) -> GreedyTrace:
    """Greedy maximization with bookkeeping.

    `fixed` elements are placed first without counting as picks; `forbidden`
    elements are never selected (used for the capacity-strip rerun). Ties
    break toward the smaller call index, then the smaller car index.
    """
    n, c = matroid.n_calls, matroid.n_cars
    w = objective.weights
    if (n, c) != (w.n_calls, w.n_cars):
        raise ValueError("matroid and weight dimensions disagree")
    banned = {(e.call_id, e.car) for e in forbidden}
    by_car: dict[int, list[int]] = {}
    block_used = [0] * n
    chosen: list[GroundElement] = []
    unary = objective._unary
    penalties = objective._penalties
    pw = objective._pairwise
    pairsum = [[0.0] * c for _ in range(n)]

    def place(i: int, car: int) -> None:
        block_used[i] += 1
        by_car.setdefault(car, []).append(i)
        for k in range(n):
            pairsum[k][car] += pw[k][i][car]

    if fixed:
        for e in sorted(fixed):
            place(e.call_id, e.car)
            chosen.append(e)
    trace = GreedyTrace(AssignmentSet())
    ho_index = objective._ho_by_car_call
    while True:
        best = None
        best_gain = -np.inf
        for i in range(n):
            if block_used[i] >= matroid.capacities[i]:
                continue
            base = penalties[i]
            row_u = unary[i]
            row_ps = pairsum[i]
            for car in range(c):
                if banned and (i, car) in banned:
                    continue
                trace.evaluations += 1
                gain = base - row_u[car] - row_ps[car]
                if ho_index:
                    terms = ho_index.get((car, i))
                    if terms:
                        members = by_car.get(car)
                        if members:
                            present = set(members)
                            for rest, penalty in terms:
                                if rest <= present:
                                    gain -= penalty
                if gain > best_gain:
                    best = (i, car)
                    best_gain = gain
        if best is None:
            break
        element = GroundElement(*best)
        trace.picks.append((element, float(best_gain)))
        chosen.append(element)
        place(*best)
    trace.assignment = AssignmentSet(chosen)
    return trace


def greedy_maximize(objective: Objective, matroid: PartitionMatroid,
                    fixed: AssignmentSet | None = None,
                    forbidden: Iterable[GroundElement] = ()) -> AssignmentSet:
    """Greedy argmax of f over the matroid; returns a basis (every call
    assigned) when nothing is forbidden, by monotonicity of f."""
    return greedy_maximize_trace(objective, matroid, fixed, forbidden).assignment


def brute_force_optimal(objective: Objective, matroid: PartitionMatroid,
                        budget: int = 10 ** 6) -> AssignmentSet:
    """Exhaustive optimum over complete assignments (the C^N candidates).

    Minimizes g, equivalently maximizes f over bases; ties broken by the
    lexicographically smallest car vector. Refuses instances beyond the
    enumeration budget rather than sampling.
    """
    n, c = matroid.n_calls, matroid.n_cars
    if c ** n > budget:
        raise ValueError(f"{c}^{n} assignments exceed the enumeration budget {budget}")
    unary = objective._unary
    pw = objective._pairwise
    ho = objective.weights.higher_order
    best_vec = None
    best_g = np.inf
    for vec in product(range(c), repeat=n):
        total = 0.0
        for i in range(n):
            car = vec[i]
            total += unary[i][car]
            row = pw[i]
            for j in range(i + 1, n):
                if vec[j] == car:
                    total += row[j][car]
        for term in ho:
            if all(vec[i] == term.car for i in term.calls):
                total += term.penalty
        if total < best_g - 1e-15:
            best_g = total
            best_vec = vec
    return AssignmentSet.from_pairs((i, car) for i, car in enumerate(best_vec))


@dataclass
class SubmodularityReport:
    """Outcome of randomized diminishing-returns checks."""

    trials: int
    violations: list[tuple[AssignmentSet, AssignmentSet, GroundElement, float, float]]
    max_violation: float

    @property
    def ok(self) -> bool:
        return not self.violations


def check_submodular(objective: Objective, trials: int = 200,
                     rng: np.random.Generator | None = None,
                     tol: float = 1e-9) -> SubmodularityReport:
    """Sample B ⊆ A ⊆ E and e ∉ A; flag f(A+e)-f(A) > f(B+e)-f(B)+tol."""
    rng = rng or np.random.default_rng()
    n, c = objective.n_calls, objective.n_cars
    ground = [GroundElement(i, car) for i in range(n) for car in range(c)]
    indices = np.arange(len(ground))
    violations = []
    worst = 0.0
    for _ in range(trials):
        mask = rng.random(len(ground)) < rng.uniform(0.1, 0.9)
        outside = indices[~mask]
        if outside.size == 0:
            continue
        a_idx = indices[mask]
        e = ground[int(outside[int(rng.integers(outside.size))])]
        keep = rng.random(a_idx.size) < rng.uniform(0.0, 1.0)
        a = AssignmentSet(ground[int(k)] for k in a_idx)
        b = AssignmentSet(ground[int(k)] for k in a_idx[keep])
        lhs = objective.f_value(a.add(e)) - objective.f_value(a)
        rhs = objective.f_value(b.add(e)) - objective.f_value(b)
        gap = lhs - rhs
        worst = max(worst, gap)
        if gap > tol:
            violations.append((a, b, e, lhs, rhs))
    return SubmodularityReport(trials, violations, worst)
