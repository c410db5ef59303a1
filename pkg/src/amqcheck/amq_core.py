"""The generic AMQ contract and the probabilistic wrappers around it.

An AMQ splits into a hash layer (one of the hash kinds in
``amqcheck.hashing``) and a deterministic state machine driven by hash
outputs. ``Amq`` subclasses supply the state machine; ``amq_add``,
``amq_addm`` and ``amq_query`` thread the hash layer and the randomness.

The laws every instance must satisfy are checked here rather than
assumed:

* insertion validity - ``query_internal(add_internal(s, v), v)`` holds
* query preservation - a positive query stays positive after more inserts
* no false negatives - ``add x; addm xs; query x`` is true on every seed
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from amqcheck.errors import CapacityExceeded
from amqcheck.hashing import Rng


class Amq(abc.ABC):
    """One AMQ instance: parameters, its hash kind and its pure operations."""

    name: str = "amq"
    hash: Any

    @abc.abstractmethod
    def new(self): ...

    @abc.abstractmethod
    def add_internal(self, state, output): ...

    @abc.abstractmethod
    def query_internal(self, state, output) -> bool: ...

    @abc.abstractmethod
    def available_capacity(self, state, n: int) -> bool: ...

    @abc.abstractmethod
    def false_positive(self, l: int) -> Fraction:
        """Closed-form false-positive probability after ``l`` unseen inserts."""

    def params(self) -> dict:
        return {}

    def encode(self, state) -> bytes:
        raise NotImplementedError

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


def amq_add(amq: Amq, key: int, layer, state, rng):
    if not amq.available_capacity(state, 1):
        raise CapacityExceeded(f"{amq!r} cannot absorb another insert")
    layer, out = amq.hash.hash(key, layer, rng)
    return layer, amq.add_internal(state, out)


def amq_addm(amq: Amq, keys: Sequence[int], layer, state, rng):
    if not amq.available_capacity(state, len(keys)):
        raise CapacityExceeded(f"{amq!r} cannot absorb {len(keys)} inserts")
    for key in keys:
        layer, state = amq_add(amq, key, layer, state, rng)
    return layer, state


def amq_query(amq: Amq, key: int, layer, state, rng):
    layer, out = amq.hash.hash(key, layer, rng)
    return layer, amq.query_internal(state, out)


@dataclass
class CheckResult:
    name: str
    passed: bool
    checked: int = 0
    rejected: bool = False
    detail: str = ""
    counterexample: dict | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else ("REJECTED" if self.rejected else "FAIL")
        text = f"{status} {self.name} ({self.checked} checked)"
        if self.detail:
            text += f": {self.detail}"
        return text


def check_nfn(
    amq: Amq,
    x: int,
    xs: Sequence[int],
    seeds: Iterable[int],
    tamper: Callable[[Any], Any] | None = None,
) -> CheckResult:
    """Run ``add x; addm xs; query x`` under every seed; all must answer true.

    ``tamper`` is applied to the filter state just before the query. It
    exists so tests can confirm the check actually detects a broken state.
    A scenario the structure lacks capacity for is rejected, not failed.
    """
    name = f"no-false-negatives {amq!r}"
    keys = [x, *xs]
    if len(set(keys)) != len(keys):
        raise ValueError("scenario keys must be distinct")
    fresh = amq.new()
    if not amq.available_capacity(fresh, len(keys)):
        return CheckResult(name, passed=False, rejected=True, detail=f"no capacity for {len(keys)} inserts")
    checked = 0
    for seed in seeds:
        rng = Rng(seed)
        layer, state = amq_add(amq, x, amq.hash.new(), fresh, rng)
        layer, state = amq_addm(amq, xs, layer, state, rng)
        if tamper is not None:
            state = tamper(state)
        layer, found = amq_query(amq, x, layer, state, rng)
        checked += 1
        if not found:
            return CheckResult(
                name,
                passed=False,
                checked=checked,
                detail=f"query for inserted key {x} returned false under seed {seed}",
                counterexample={"seed": seed, "x": x, "xs": list(xs), "state": repr(state), "layer": repr(layer)},
            )
    return CheckResult(name, passed=True, checked=checked)


def random_state(amq: Amq, rng: Rng, max_inserts: int):
    """A state reached by inserting up to ``max_inserts`` random hash outputs."""
    state = amq.new()
    for _ in range(rng.draw(max_inserts + 1)):
        if not amq.available_capacity(state, 1):
            break
        state = amq.add_internal(state, amq.hash.random_output(rng))
    return state


def check_insertion_validity(amq: Amq, trials: int, seed: int, max_inserts: int = 8) -> CheckResult:
    name = f"insertion validity {amq!r}"
    for t in range(trials):
        rng = Rng.for_trial(seed, t)
        s = random_state(amq, rng, max_inserts)
        if not amq.available_capacity(s, 1):
            continue
        v = amq.hash.random_output(rng)
        if not amq.query_internal(amq.add_internal(s, v), v):
            return CheckResult(name, False, t + 1, counterexample={"trial": t, "state": repr(s), "output": repr(v)})
    return CheckResult(name, True, trials)


def check_query_preservation(amq: Amq, trials: int, seed: int, max_inserts: int = 8) -> CheckResult:
    name = f"query preservation {amq!r}"
    for t in range(trials):
        rng = Rng.for_trial(seed, t)
        s = random_state(amq, rng, max_inserts)
        if not amq.available_capacity(s, 1):
            continue
        # bias towards outputs already present so the premise is often true
        v = amq.hash.random_output(rng)
        if not amq.query_internal(s, v):
            s = amq.add_internal(s, v)
            if not amq.available_capacity(s, 1):
                continue
        v2 = amq.hash.random_output(rng)
        if not amq.query_internal(amq.add_internal(s, v2), v):
            return CheckResult(
                name, False, t + 1, counterexample={"trial": t, "state": repr(s), "v": repr(v), "v2": repr(v2)}
            )
    return CheckResult(name, True, trials)


@dataclass(frozen=True)
class AmqMapWitness:
    """A state map from ``source`` to ``target`` sharing one hash kind."""

    source: Amq
    target: Amq
    map_state: Callable[[Any], Any]
    name: str = field(default="map")


def check_amq_map(witness: AmqMapWitness, scenarios: Iterable[tuple[Any, Any]]) -> CheckResult:
    """Check add-commutativity and query-preservation on ``(state, output)`` pairs.

    map(A.add(s, v)) == B.add(map(s), v) is only required when ``s`` has
    capacity for one more insert; query agreement is required always.
    """
    a, b, f = witness.source, witness.target, witness.map_state
    name = f"amq-map {witness.name}: {a!r} -> {b!r}"
    checked = 0
    for s, v in scenarios:
        checked += 1
        mapped = f(s)
        if b.query_internal(mapped, v) != a.query_internal(s, v):
            return CheckResult(name, False, checked, detail="query not preserved",
                               counterexample={"state": repr(s), "output": repr(v)})
        if a.available_capacity(s, 1) and f(a.add_internal(s, v)) != b.add_internal(mapped, v):
            return CheckResult(name, False, checked, detail="add does not commute with map",
                               counterexample={"state": repr(s), "output": repr(v)})
    if f(a.new()) != b.new():
        return CheckResult(name, False, checked, detail="map(A.new) != B.new")
    return CheckResult(name, True, checked)


def map_scenarios(amq: Amq, count: int, seed: int, max_inserts: int = 8):
    for t in range(count):
        rng = Rng.for_trial(seed, t)
        yield random_state(amq, rng, max_inserts), amq.hash.random_output(rng)


def check_trace_equivalence(witness: AmqMapWitness, l: int, trials: int, seed: int) -> CheckResult:
    """Run the false-positive experiment on source and target under identical
    seeds; the query answers and mapped states must agree trial for trial.

    This is stronger than equality of the two false-positive rates, which
    follows from it.
    """
    a, b, f = witness.source, witness.target, witness.map_state
    name = f"trace equivalence {witness.name}: {a!r} ~ {b!r}"
    keys = list(range(l))
    y = l
    if not (a.available_capacity(a.new(), l) and b.available_capacity(b.new(), l)):
        return CheckResult(name, passed=False, rejected=True, detail=f"no capacity for {l} inserts")
    for t in range(trials):
        ra, rb = Rng.for_trial(seed, t), Rng.for_trial(seed, t)
        la, sa = amq_addm(a, keys, a.hash.new(), a.new(), ra)
        lb, sb = amq_addm(b, keys, b.hash.new(), b.new(), rb)
        _, qa = amq_query(a, y, la, sa, ra)
        _, qb = amq_query(b, y, lb, sb, rb)
        if qa != qb or f(sa) != sb:
            return CheckResult(name, False, t + 1,
                               counterexample={"trial": t, "source": repr(sa), "target": repr(sb), "qa": qa, "qb": qb})
    return CheckResult(name, True, trials)


def conformance(amq: Amq, trials: int = 1000, seed: int = 0) -> list[CheckResult]:
    return [
        check_insertion_validity(amq, trials, seed),
        check_query_preservation(amq, trials, seed + 1),
    ]
