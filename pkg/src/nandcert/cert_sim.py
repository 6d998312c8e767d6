"""Query-cost simulation of the recursive certificate-finding procedures.

The two procedures find a certificate for a claimed root value b: the
0-finder queries a bottom subtree outright and recurses through the
1-finder on every child; the 1-finder locates a 0-evaluating child by a
simulated quantum search, verifies it by majority vote, and recurses.
Quantum subroutines are stochastic cost/error oracles here, never state
vectors: a search over m items costs a unit times sqrt(m) and errs at a
configurable rate.  A cutoff-and-restart wrapper turns the bounded-error
procedures into a zero-error one.

On an input whose true value is the complement of the claimed b, the
procedures provably never emit a certificate; the simulator represents
such runs as a detected non-termination event at the cost cap.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, asdict, field
from typing import Optional, Sequence

from .caps import current_caps
from .formula import Certificate, FormulaShape, evaluate, is_certificate, parse_assignment


class CutoffExceeded(RuntimeError):
    """A budgeted run exceeded its cost cap before producing a certificate."""

    def __init__(self, cost: float, events: tuple[str, ...]):
        super().__init__(f"cost cap hit at {cost} query units")
        self.cost = cost
        self.events = events


class NonHaltingDetected(RuntimeError):
    """An unbudgeted run reached a state it can never leave."""


class RestartLimitExceeded(RuntimeError):
    """The zero-error wrapper hit its restart cap; the model is misconfigured."""


@dataclass(frozen=True)
class CostModel:
    """Cost and error constants for the simulated subroutines.

    grover_unit scales the sqrt(m) cost of searching m leaves; eval_unit
    scales the sqrt(size) cost of one subtree evaluation call; eval_error
    is the per-call two-sided error of evaluation (and of the robust
    subtree search built on it); robust_unit scales the robust search
    cost; wrapper_constant multiplies the closed-form bound to give the
    restart cutoff.  verify_reps(n) is the majority-vote repetition count,
    derived from eval_error unless overridden.
    """

    grover_unit: float = 1.0
    eval_unit: float = 1.0
    eval_error: float = 0.0
    robust_unit: float = 1.0
    wrapper_constant: float = 8.0
    grover_success: float = 1.0
    verify_reps_override: Optional[int] = None

    def __post_init__(self) -> None:
        if min(self.grover_unit, self.eval_unit, self.robust_unit) <= 0:
            raise ValueError("cost multipliers must be positive")
        if not 0 <= self.eval_error < 0.5:
            raise ValueError("evaluation error must lie in [0, 1/2)")
        if not 0 < self.grover_success <= 1:
            raise ValueError("grover success probability must lie in (0, 1]")
        if self.wrapper_constant <= 0:
            raise ValueError("wrapper constant must be positive")

    def verify_reps(self, n: int) -> int:
        """Majority-vote repetitions pushing verification error below 1/n^2.

        Each call errs with probability eps, so a majority of r calls errs
        with probability at most (2 sqrt(eps(1-eps)))^r; solving for 1/n^2
        gives r = ceil(2 ln n / ln(1/(2 sqrt(eps(1-eps))))).
        """
        if self.verify_reps_override is not None:
            return max(1, int(self.verify_reps_override))
        if self.eval_error == 0.0 or n <= 1:
            return 1
        base = 2.0 * math.sqrt(self.eval_error * (1.0 - self.eval_error))
        return max(1, math.ceil(2.0 * math.log(n) / math.log(1.0 / base)))

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "CostModel":
        return cls(**data)


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one certificate-finding run: what it found and what it cost."""

    certificate: Certificate
    queries: float
    restarts: int
    verification_failures: int
    leaf_queries: int
    grover_calls: int
    robust_search_calls: int
    eval_calls: int


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of running a procedure against a complement-valued input."""

    requested_value: int
    cost_cap: float
    halted: bool
    certificate: Optional[Certificate]
    cost: float
    events: tuple[str, ...]


def closed_form_bound(d: int, k: int, b: int, log_base: float = math.e) -> float:
    """Unit-constant expected-cost bound k(1 + k log(d)/sqrt(d)) sqrt(d^(k+1)).

    The b = 1 variant replaces sqrt(d^(k+1)) by sqrt(d^k).  Natural log by
    default; pass log_base=2 for base-2.
    """
    FormulaShape(d, k)
    if k < 1:
        raise ValueError("bound is defined for k >= 1")
    if b not in (0, 1):
        raise ValueError(f"formula value must be 0 or 1, got {b!r}")
    poly = k * (1.0 + k * math.log(d, log_base) / math.sqrt(d))
    power = d ** (k + 1) if b == 0 else d**k
    return poly * math.sqrt(float(power))


def recurrence_expected_cost(d: int, k: int, b: int, model: CostModel) -> float:
    """Expected query cost by the error-free recurrence with explicit constants.

    Base cases: the 0-finder on one level queries all d leaves; the
    1-finder runs one simulated search at grover_unit * sqrt(d).  Above
    that, the 0-finder pays d 1-finder calls one level down, and the
    1-finder pays one robust search, one majority-vote verification, and
    one 0-finder call one level down.  The verification repetition count
    is fixed by the top-level leaf count.
    """
    FormulaShape(d, k)
    if k < 1:
        raise ValueError("recurrence is defined for k >= 1")
    if b not in (0, 1):
        raise ValueError(f"formula value must be 0 or 1, got {b!r}")
    reps = model.verify_reps(d**k)

    def eval_cost(level: int) -> float:
        return model.eval_unit * math.sqrt(float(d**level))

    e0 = float(d)
    e1 = model.grover_unit * math.sqrt(d)
    for level in range(2, k + 1):
        e0_next = d * e1
        e1_next = (
            model.robust_unit * math.sqrt(d) * eval_cost(level - 1)
            + reps * eval_cost(level - 1)
            + e0
        )
        e0, e1 = e0_next, e1_next
    return e0 if b == 0 else e1


class _Cutoff(Exception):
    pass


class _Engine:
    """One budgeted run of a certificate-finding procedure against ground truth."""

    def __init__(
        self,
        shape: FormulaShape,
        x: Sequence[int],
        model: CostModel,
        rng: random.Random,
        cost_cap: Optional[float],
    ):
        self.shape = shape
        self.x = parse_assignment(shape, x)
        self.model = model
        self.rng = rng
        self.cost_cap = cost_cap
        self.reps = model.verify_reps(shape.n)
        self.cost = 0.0
        self.leaf_queries = 0
        self.grover_calls = 0
        self.robust_search_calls = 0
        self.eval_calls = 0
        self.verification_failures = 0
        self.events: list[str] = []
        # ground-truth value of every node, bottom-up; level L node p covers
        # leaves p*d^L .. (p+1)*d^L - 1
        levels = [list(self.x)]
        for _ in range(shape.k):
            prev = levels[-1]
            d = shape.d
            levels.append(
                [
                    0 if all(prev[p * d + t] == 1 for t in range(d)) else 1
                    for p in range(len(prev) // d)
                ]
            )
        self._levels = levels

    def true_value(self, level: int, offset: int) -> int:
        return self._levels[level][offset // self.shape.subtree_size(level)]

    def charge(self, amount: float) -> None:
        self.cost += amount
        if self.cost_cap is not None and self.cost > self.cost_cap:
            self.cost = self.cost_cap  # the run stops exactly at the cutoff
            self.events.append("cutoff")
            raise _Cutoff()

    def diverge(self, reason: str) -> None:
        """The run entered a state it can never leave; burn the budget."""
        self.events.append(reason)
        if self.cost_cap is None:
            raise NonHaltingDetected(
                f"run would never halt ({reason}); supply a cost cap to bound it"
            )
        self.cost = self.cost_cap
        raise _Cutoff()

    def eval_cost(self, level: int) -> float:
        return self.model.eval_unit * math.sqrt(float(self.shape.d**level))

    def certify(self, b: int) -> set[int]:
        if b == 0:
            return self.find_zero_certificate(self.shape.k, 0)
        return self.find_one_certificate(self.shape.k, 0)

    def find_zero_certificate(self, level: int, offset: int) -> set[int]:
        d = self.shape.d
        if level == 0:
            self.charge(1.0)
            self.leaf_queries += 1
            if self.x[offset] == 0:
                return {offset + 1}
            self.diverge("base_case_loop")
        if level == 1:
            self.charge(float(d))
            self.leaf_queries += d
            if all(self.x[offset + t] == 1 for t in range(d)):
                return set(range(offset + 1, offset + d + 1))
            self.diverge("base_case_loop")
        sub = self.shape.subtree_size(level - 1)
        indices: set[int] = set()
        for j in range(d):
            indices |= self.find_one_certificate(level - 1, offset + j * sub)
        return indices

    def find_one_certificate(self, level: int, offset: int) -> set[int]:
        d = self.shape.d
        if level == 0:
            self.charge(1.0)
            self.leaf_queries += 1
            if self.x[offset] == 1:
                return {offset + 1}
            self.diverge("base_case_loop")
        if level == 1:
            zero_positions = [t for t in range(d) if self.x[offset + t] == 0]
            while True:
                self.grover_calls += 1
                self.charge(self.model.grover_unit * math.sqrt(d))
                if not zero_positions:
                    self.diverge("grover_exhausted")
                if self.rng.random() < self.model.grover_success:
                    return {offset + self.rng.choice(zero_positions) + 1}
        sub = self.shape.subtree_size(level - 1)
        child_values = [self.true_value(level - 1, offset + j * sub) for j in range(d)]
        zero_children = [j for j in range(d) if child_values[j] == 0]
        other_children = [j for j in range(d) if child_values[j] == 1]
        while True:
            self.robust_search_calls += 1
            self.charge(self.model.robust_unit * math.sqrt(d) * self.eval_cost(level - 1))
            if not zero_children:
                # promise-violating branch: no 0-subtree exists, so robust
                # search hands back a uniformly random subtree
                candidate = self.rng.randrange(d)
            elif other_children and self.rng.random() < self.model.eval_error:
                candidate = self.rng.choice(other_children)
            else:
                candidate = self.rng.choice(zero_children)
            truly_zero = child_values[candidate] == 0
            if self._verify_zero_subtree(level - 1, truly_zero):
                return self.find_zero_certificate(level - 1, offset + candidate * sub)

    def _verify_zero_subtree(self, level: int, truly_zero: bool) -> bool:
        """Majority vote over repeated evaluation calls; returns the verdict."""
        self.eval_calls += self.reps
        self.charge(self.reps * self.eval_cost(level))
        wrong = sum(self.rng.random() < self.model.eval_error for _ in range(self.reps))
        majority_correct = (self.reps - wrong) > wrong
        verdict = truly_zero if majority_correct else not truly_zero
        if verdict != truly_zero:
            self.verification_failures += 1
        return verdict


def _run_once(
    shape: FormulaShape,
    x: Sequence[int],
    b: int,
    model: CostModel,
    rng: random.Random,
    cost_cap: Optional[float],
) -> tuple[Optional[set[int]], _Engine]:
    engine = _Engine(shape, x, model, rng, cost_cap)
    try:
        return engine.certify(b), engine
    except _Cutoff:
        return None, engine


def simulate_certify(
    shape: FormulaShape,
    x: Sequence[int],
    b: int,
    model: CostModel,
    seed,
    cost_cap: Optional[float] = None,
) -> RunRecord:
    """One run of the b-certificate finder on an input that truly evaluates to b.

    Raises CutoffExceeded if cost_cap is given and the run exceeds it;
    without a cap, a run that provably diverges (possible once the error
    rate is positive) raises NonHaltingDetected instead of spinning.
    """
    x = parse_assignment(shape, x)
    if b not in (0, 1):
        raise ValueError(f"claimed value must be 0 or 1, got {b!r}")
    if evaluate(shape, x) != b:
        raise ValueError(f"input evaluates to {1 - b}, not the claimed {b}")
    indices, engine = _run_once(shape, x, b, model, random.Random(f"{seed}"), cost_cap)
    if indices is None:
        raise CutoffExceeded(engine.cost, tuple(engine.events))
    return RunRecord(
        certificate=Certificate(frozenset(indices), b),
        queries=engine.cost,
        restarts=0,
        verification_failures=engine.verification_failures,
        leaf_queries=engine.leaf_queries,
        grover_calls=engine.grover_calls,
        robust_search_calls=engine.robust_search_calls,
        eval_calls=engine.eval_calls,
    )


def wrapper_cutoff(shape: FormulaShape, b: int, model: CostModel) -> float:
    """Restart cutoff: the wrapper constant times the closed-form bound."""
    return model.wrapper_constant * closed_form_bound(shape.d, shape.k, b)


def simulate_zero_error_wrapper(
    shape: FormulaShape, x: Sequence[int], b: int, model: CostModel, seed
) -> RunRecord:
    """Cutoff-and-restart runs of the finder until a correct certificate lands.

    Every restart draws fresh randomness; queries accumulate across
    restarts.  The returned certificate always passes is_certificate (a
    halting run is correct by construction; this re-checks it).
    """
    x = parse_assignment(shape, x)
    if evaluate(shape, x) != b:
        raise ValueError(f"input evaluates to {1 - b}, not the claimed {b}")
    cutoff = wrapper_cutoff(shape, b, model)
    restart_limit = current_caps().restart_limit
    total_cost = 0.0
    failures = leafs = grovers = robusts = evals = 0
    for attempt in range(restart_limit):
        rng = random.Random(f"{seed}:{attempt}")
        indices, engine = _run_once(shape, x, b, model, rng, cutoff)
        total_cost += engine.cost
        failures += engine.verification_failures
        leafs += engine.leaf_queries
        grovers += engine.grover_calls
        robusts += engine.robust_search_calls
        evals += engine.eval_calls
        if indices is not None:
            cert = Certificate(frozenset(indices), b)
            if not is_certificate(shape, cert.indices, x):
                raise RuntimeError(f"finder returned a non-certificate {cert}; engine bug")
            return RunRecord(
                certificate=cert,
                queries=total_cost,
                restarts=attempt,
                verification_failures=failures,
                leaf_queries=leafs,
                grover_calls=grovers,
                robust_search_calls=robusts,
                eval_calls=evals,
            )
    raise RestartLimitExceeded(
        f"no certificate within {restart_limit} restarts; "
        f"cutoff {cutoff} is too tight for this model"
    )


def non_halting_probe(
    shape: FormulaShape,
    x: Sequence[int],
    requested_b: int,
    model: CostModel,
    step_cap: float,
    seed=0,
) -> ProbeReport:
    """Run the b-finder against an input whose true value is the complement.

    The procedures never halt on such inputs; the probe confirms that no
    certificate appears within step_cap cost units and reports the
    divergence events it detected.
    """
    x = parse_assignment(shape, x)
    if requested_b not in (0, 1):
        raise ValueError(f"claimed value must be 0 or 1, got {requested_b!r}")
    if evaluate(shape, x) != 1 - requested_b:
        raise ValueError("probe requires an input evaluating to the complement value")
    if step_cap <= 0:
        raise ValueError("step cap must be positive")
    indices, engine = _run_once(
        shape, x, requested_b, model, random.Random(f"{seed}"), step_cap
    )
    certificate = None
    if indices is not None:
        certificate = Certificate(frozenset(indices), requested_b)
    return ProbeReport(
        requested_value=requested_b,
        cost_cap=step_cap,
        halted=indices is not None,
        certificate=certificate,
        cost=engine.cost,
        events=tuple(engine.events),
    )
