"""Exact enumeration oracle and seeded Monte-Carlo estimation.

The oracle never consults a closed form. It runs a scripted scenario
against a draw source that replays a chosen assignment of hash outcomes,
learns where fresh draws happen (and over which domain) from the replay
itself, and walks every assignment in lexicographic order. Each leaf has
weight prod(1/d) over its draws; the probability of an event is the total
weight of the leaves where it holds.

Two modes share that machinery:

``replay``
    the whole scenario is one program, every complete assignment is a
    leaf. Literal, and exponential in the number of draws.
``merged``
    the scenario is enumerated one step at a time and identical
    intermediate worlds are merged, carrying a rational weight. Hash-layer
    entries for keys no later step mentions are dropped first, since they
    cannot influence anything downstream. Same answer, far fewer leaves.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from amqcheck.amq_core import Amq, CheckResult, amq_add, amq_addm, amq_query, check_nfn
from amqcheck.analytic import format_exact, to_float
from amqcheck.errors import AmqError, CapacityExceeded, EnumerationTooLarge
from amqcheck.hashing import Rng, mix

ENUMERATION_LIMIT = 10**7


class ScriptedDraws:
    """Draw source replaying ``prefix`` and answering 0 past its end.

    Every draw with ``d > 1`` is logged in ``domains``; ``d == 1`` answers 0
    without a log entry, matching ``Rng``.
    """

    def __init__(self, prefix: Sequence[int] = ()):
        self.prefix = prefix
        self.domains: list[int] = []

    def draw(self, d: int) -> int:
        if d < 1:
            raise ValueError(f"domain size must be >= 1, got {d}")
        if d == 1:
            return 0
        pos = len(self.domains)
        self.domains.append(d)
        return self.prefix[pos] if pos < len(self.prefix) else 0


@dataclass
class OutcomeEnumeration:
    """Every equally weighted assignment of fresh draws for one program."""

    outcomes: list[tuple[Fraction, Any]]  # (weight, program result)
    domain_sizes: tuple[int, ...]  # of the first (all-zero) assignment
    leaves: int

    @property
    def draw_count(self) -> int:
        return len(self.domain_sizes)

    @property
    def total(self) -> int:
        return math.prod(self.domain_sizes)

    def probability(self, event: Callable[[Any], bool]) -> Fraction:
        return sum((w for w, r in self.outcomes if event(r)), Fraction(0))

    def distribution(self) -> dict[Any, Fraction]:
        dist: dict[Any, Fraction] = {}
        for w, r in self.outcomes:
            dist[r] = dist.get(r, Fraction(0)) + w
        return dist


def _walk(program: Callable[[Any], Any], limit: int):
    """Yield ``(result, domains)`` once per assignment of the program's draws.

    The draw tree is discovered lazily, so the number and domains of draws
    may depend on earlier outcomes.
    """
    prefix: list[int] = []
    leaves = 0
    while True:
        src = ScriptedDraws(prefix)
        result = program(src)
        domains = src.domains
        if leaves == 0 and math.prod(domains) > limit:
            raise EnumerationTooLarge(f"{math.prod(domains)} assignments exceed the limit of {limit}")
        leaves += 1
        if leaves > limit:
            raise EnumerationTooLarge(f"more than {limit} assignments")
        yield result, domains
        assignment = prefix[: len(domains)] + [0] * (len(domains) - len(prefix))
        # odometer step: bump the last position that still has room
        j = len(domains) - 1
        while j >= 0 and assignment[j] == domains[j] - 1:
            j -= 1
        if j < 0:
            return
        prefix = assignment[:j] + [assignment[j] + 1]


def enumerate_outcomes(program: Callable[[Any], Any], limit: int = ENUMERATION_LIMIT) -> OutcomeEnumeration:
    """Run ``program(draws)`` once per assignment of its fresh draws."""
    outcomes = []
    first = None
    for result, domains in _walk(program, limit):
        if first is None:
            first = tuple(domains)
        outcomes.append((Fraction(1, math.prod(domains)), result))
    return OutcomeEnumeration(outcomes, first, len(outcomes))


def enumerate_distribution(program: Callable[[Any], Any], limit: int = ENUMERATION_LIMIT) -> tuple[dict, int]:
    """Exact distribution of ``program``'s result and the number of leaves.

    Leaves are tallied as integer counts per (result, weight denominator)
    so rational arithmetic happens once per distinct result.
    """
    counts: dict[tuple[Any, int], int] = {}
    leaves = 0
    for result, domains in _walk(program, limit):
        key = (result, math.prod(domains))
        counts[key] = counts.get(key, 0) + 1
        leaves += 1
    dist: dict[Any, Fraction] = {}
    for (result, denom), n in counts.items():
        dist[result] = dist.get(result, Fraction(0)) + Fraction(n, denom)
    return dist, leaves


# --- scripted scenarios -------------------------------------------------
#
# A script is a sequence of steps:
#   ("add", key)          amq_add
#   ("query", key)        amq_query, answer appended to the results
#   ("remove", key)       cf_remove (counting filters only)
#   ("hash", key)         hash through the layer, output appended
#   ("probe", fn)         fn(filter state) appended; fn must be pure


@dataclass(frozen=True)
class World:
    layer: Any
    state: Any
    results: tuple = ()


def _keys_of(step) -> tuple[int, ...]:
    op = step[0]
    if op in ("add", "query", "remove", "hash"):
        return (step[1],)
    if op == "addm":
        return tuple(step[1])
    return ()


def run_step(amq: Amq, world: World, step, rng) -> World:
    op = step[0]
    if op == "add":
        layer, state = amq_add(amq, step[1], world.layer, world.state, rng)
        return World(layer, state, world.results)
    if op == "addm":
        layer, state = world.layer, world.state
        for key in step[1]:
            layer, state = amq_add(amq, key, layer, state, rng)
        return World(layer, state, world.results)
    if op == "query":
        layer, found = amq_query(amq, step[1], world.layer, world.state, rng)
        return World(layer, world.state, world.results + (found,))
    if op == "remove":
        from amqcheck.counting_bloom import cf_remove

        layer, state = cf_remove(amq, step[1], world.layer, world.state, rng)
        return World(layer, state, world.results)
    if op == "hash":
        layer, out = amq.hash.hash(step[1], world.layer, rng)
        return World(layer, world.state, world.results + (out,))
    if op == "probe":
        return World(world.layer, world.state, world.results + (step[1](world.state),))
    raise ValueError(f"unknown scenario step {op!r}")


def run_script(amq: Amq, script: Sequence, rng) -> World:
    world = World(amq.hash.new(), amq.new())
    for step in script:
        world = run_step(amq, world, step, rng)
    return world


Event = Callable[[tuple, Any], bool]


def oracle_probability(
    amq: Amq,
    script: Sequence,
    event: Event,
    *,
    mode: str = "merged",
    limit: int = ENUMERATION_LIMIT,
) -> Fraction:
    """Exact probability that ``event(results, final_state)`` holds."""
    dist = oracle_distribution(amq, script, mode=mode, limit=limit)
    return sum((w for (results, state), w in dist.items() if event(results, state)), Fraction(0))


def oracle_distribution(
    amq: Amq, script: Sequence, *, mode: str = "merged", limit: int = ENUMERATION_LIMIT
) -> dict[tuple, Fraction]:
    """Distribution over ``(results, final_state)`` pairs."""
    if mode == "replay":
        enum = enumerate_outcomes(lambda src: _final(run_script(amq, script, src)), limit)
        return enum.distribution()
    if mode != "merged":
        raise ValueError(f"unknown oracle mode {mode!r}")

    later_keys = [set() for _ in range(len(script) + 1)]
    for i in range(len(script) - 1, -1, -1):
        later_keys[i] = later_keys[i + 1] | set(_keys_of(script[i]))

    worlds: dict[World, Fraction] = {World(amq.hash.new(), amq.new()): Fraction(1)}
    seen: set[int] = set()
    evaluated = 0
    for i, step in enumerate(script):
        seen |= set(_keys_of(step))
        dead = seen - later_keys[i + 1]
        probe = ScriptedDraws()
        run_step(amq, next(iter(worlds)), step, probe)
        estimate = math.prod(probe.domains) * len(worlds)
        if evaluated + estimate > limit:
            raise EnumerationTooLarge(
                f"step {i} needs about {estimate} evaluations, over the remaining budget of {limit - evaluated}"
            )
        nxt: dict[World, Fraction] = {}

        def program(src, world):
            out = run_step(amq, world, step, src)
            return World(amq.hash.forget(out.layer, dead), out.state, out.results)

        for world, p in worlds.items():
            dist, leaves = enumerate_distribution(lambda src, w=world: program(src, w), limit - evaluated)
            evaluated += leaves
            for out, w in dist.items():
                nxt[out] = nxt.get(out, Fraction(0)) + p * w
        worlds = nxt
    dist: dict[tuple, Fraction] = {}
    for world, p in worlds.items():
        key = _final(world)
        dist[key] = dist.get(key, Fraction(0)) + p
    return dist


def _final(world: World) -> tuple:
    return world.results, world.state


def fp_script(l: int) -> list:
    """Insert keys 0..l-1, then query the unseen key l."""
    return [("add", key) for key in range(l)] + [("query", l)]


def last_result(results: tuple, state) -> bool:
    return bool(results[-1])


def oracle_false_positive(amq: Amq, l: int, *, mode: str = "merged", limit: int = ENUMERATION_LIMIT) -> Fraction:
    return oracle_probability(amq, fp_script(l), last_result, mode=mode, limit=limit)


# --- Monte Carlo ----------------------------------------------------------


def wilson_interval(successes: int, trials: int, z: float) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    if z <= 0:
        raise ValueError("z must be positive")
    n = trials
    p = successes / n
    z2 = z * z
    denom = 1 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n))
    low = 0.0 if successes == 0 else max(0.0, min(center - half, p))
    high = 1.0 if successes == trials else min(1.0, max(center + half, p))
    return low, high


@dataclass
class SimulationReport:
    structure: str
    params: dict
    l: int
    trials: int
    seed: int
    successes: int
    estimate: float
    ci_low: float
    ci_high: float
    analytic_exact: str
    analytic_float: float
    z: float
    aborted_trials: int = 0
    analytic: Fraction = field(default=Fraction(0), repr=False)

    @property
    def within_interval(self) -> bool:
        return self.ci_low <= self.analytic_float <= self.ci_high

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("analytic")
        return d


def estimate_fp(amq: Amq, l: int, trials: int, seed: int, z: float = 4.0) -> SimulationReport:
    """Monte-Carlo false-positive rate after ``l`` unseen inserts.

    Trial ``t`` runs on stream ``mix(seed, t)`` with a fresh filter and hash
    layer, inserts keys ``0..l-1`` and queries key ``l``. Trials that run out
    of capacity are counted in ``aborted_trials`` and left out of the
    estimate.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if l < 0:
        raise ValueError("insert count must be >= 0")
    keys = list(range(l))
    successes = 0
    aborted = 0
    for t in range(trials):
        rng = Rng.for_trial(seed, t)
        try:
            layer, state = amq_addm(amq, keys, amq.hash.new(), amq.new(), rng)
        except CapacityExceeded:
            aborted += 1
            continue
        _, found = amq_query(amq, l, layer, state, rng)
        successes += found
    counted = trials - aborted
    analytic = amq.false_positive(l)
    if counted:
        estimate = successes / counted
        low, high = wilson_interval(successes, counted, z)
    else:
        estimate, low, high = 0.0, 0.0, 1.0
    return SimulationReport(
        structure=amq.name,
        params=amq.params(),
        l=l,
        trials=trials,
        seed=seed,
        successes=successes,
        estimate=estimate,
        ci_low=low,
        ci_high=high,
        analytic_exact=format_exact(analytic),
        analytic_float=to_float(analytic),
        z=z,
        aborted_trials=aborted,
        analytic=analytic,
    )


def estimate_event(
    amq: Amq, script: Sequence, event: Event, trials: int, seed: int, z: float = 4.0
) -> tuple[int, int, tuple[float, float]]:
    """(successes, trials, Wilson interval) for an arbitrary scripted event."""
    successes = 0
    for t in range(trials):
        world = run_script(amq, script, Rng.for_trial(seed, t))
        successes += bool(event(world.results, world.state))
    return successes, trials, wilson_interval(successes, trials, z)


def check_no_false_negatives(
    amq: Amq,
    l: int,
    trials: int,
    seed: int,
    tamper: Callable[[Any], Any] | None = None,
) -> CheckResult:
    """Insert key 0, then keys 1..l, then query key 0, under ``trials`` seeds."""
    seeds = (mix(seed, t) for t in range(trials))
    return check_nfn(amq, 0, list(range(1, l + 1)), seeds, tamper=tamper)


def check_scripted_certainty(
    amq: Amq, script: Sequence, event: Event, trials: int, seed: int, name: str
) -> CheckResult:
    """``event`` must hold on every one of ``trials`` seeded executions."""
    for t in range(trials):
        try:
            world = run_script(amq, script, Rng.for_trial(seed, t))
        except AmqError as exc:
            return CheckResult(name, False, t, rejected=True, detail=str(exc))
        if not event(world.results, world.state):
            return CheckResult(name, False, t + 1,
                               counterexample={"trial": t, "results": world.results, "state": repr(world.state)})
    return CheckResult(name, True, trials)



def check_counting_removal(cf, trials: int, seed: int, max_prior: int = 6) -> CheckResult:
    """``add x'; add x; remove x'; query x`` is true on every seed.

    Each trial first inserts a seed-dependent number of unrelated keys so
    the removal happens on a populated filter.
    """
    from amqcheck.counting_bloom import cf_counter_sum

    name = f"counting removal {cf!r}"
    room = _spare_inserts(cf, 2, max_prior)
    if room < 0:
        return CheckResult(name, False, 0, rejected=True, detail="no capacity for 2 inserts")
    x, x_prime = 0, 1
    for t in range(trials):
        prior = [2 + i for i in range(t % (room + 1))]
        script = [("addm", prior), ("add", x_prime), ("add", x), ("remove", x_prime), ("query", x),
                  ("probe", cf_counter_sum)]
        world = run_script(cf, script, Rng.for_trial(seed, t))
        found, total = world.results
        if not found or total != cf.k * (len(prior) + 1):
            return CheckResult(name, False, t + 1,
                               counterexample={"trial": t, "prior": prior, "state": repr(world.state)})
    return CheckResult(name, True, trials)


def check_counter_increment(cf, trials: int, seed: int, max_prior: int = 6) -> CheckResult:
    """Inserting an unseen key raises the counter sum by exactly ``k``."""
    from amqcheck.counting_bloom import cf_counter_sum

    name = f"counter increment {cf!r}"
    room = _spare_inserts(cf, 1, max_prior)
    if room < 0:
        return CheckResult(name, False, 0, rejected=True, detail="no capacity for 1 insert")
    for t in range(trials):
        prior = list(range(1, 1 + t % (room + 1)))
        script = [("addm", prior), ("probe", cf_counter_sum), ("add", 0), ("probe", cf_counter_sum)]
        world = run_script(cf, script, Rng.for_trial(seed, t))
        before, after = world.results
        if after - before != cf.k:
            return CheckResult(name, False, t + 1, counterexample={"trial": t, "before": before, "after": after})
    return CheckResult(name, True, trials)


def _spare_inserts(amq: Amq, needed: int, most: int) -> int:
    """Largest n <= most such that a fresh filter takes n + needed inserts; -1 if none."""
    fresh = amq.new()
    n = most
    while n >= 0 and not amq.available_capacity(fresh, n + needed):
        n -= 1
    return n
