"""Search loops: single-flip baseline and two-level look-ahead sampling.

Both strategies share the same skeleton: while some variable has positive
score, flip a random one; at a local optimum, update clause weights once and
escape.  They differ in the escape.

The single-flip baseline random-walks: pick a random falsified clause
(hard first) and flip its best variable.

The look-ahead strategy (``Strategy.FPS``) samples ``sc_num`` falsified
clauses, draws one variable from each (deduplicated, order preserved), and
pseudo-flips each candidate to see one step further: after the pseudo flip,
a partner variable is picked from the now-positive-score set by bounded
sampling (``sv_num`` draws, best wins).  A candidate-plus-partner pair whose
combined score is positive is taken immediately (early stop); otherwise the
step falls back to the best of the single candidate and the best pair seen,
preferring the pair on ties.

Ablation toggles in :class:`SolverConfig`:

- ``escape=EscapePolicy.RANDOM_WALK``: keep the look-ahead and its early
  stop, but when no early stop fires, escape by random walk instead of the
  best-of-sampled choice.
- ``lookahead_always=True``: run the look-ahead procedure even when
  ``good_vars`` is nonempty (weights are still only updated at local optima).
- ``early_stop=False``: probe every candidate, then flip the best pair if
  its combined score is positive, falling back to the usual comparison.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

from .engine import SearchState, WeightingParams
from .formula import INFEASIBLE, Formula, evaluate_cost


class Strategy(Enum):
    SINGLE_FLIP = "single-flip"
    FPS = "fps"


class EscapePolicy(Enum):
    """How a look-ahead step escapes when no early stop fires."""

    BEST_OF_SAMPLED = "best-of-sampled"
    RANDOM_WALK = "random-walk"


class RunStatus(Enum):
    FEASIBLE = "feasible"
    NO_FEASIBLE_FOUND = "no-feasible-found"


@dataclass
class SolverConfig:
    """Knobs for one solver run.  Defaults follow the tuned configuration."""

    strategy: Strategy = Strategy.FPS
    sc_num: int = 10
    sv_num: int = 50
    escape: EscapePolicy = EscapePolicy.BEST_OF_SAMPLED
    lookahead_always: bool = False
    early_stop: bool = True
    time_limit: float = 300.0
    max_flips: Optional[int] = None
    seed: int = 1
    weighting: Optional[WeightingParams] = None

    def __post_init__(self) -> None:
        if self.sc_num < 1:
            raise ValueError(f"sc_num must be >= 1, got {self.sc_num}")
        if self.sv_num < 1:
            raise ValueError(f"sv_num must be >= 1, got {self.sv_num}")
        if self.time_limit <= 0:
            raise ValueError(f"time_limit must be positive, got {self.time_limit}")
        if self.max_flips is not None and self.max_flips < 0:
            raise ValueError(f"max_flips must be >= 0, got {self.max_flips}")


@dataclass
class RunResult:
    """Outcome of one solver run.

    ``best_cost`` is an int when feasible, :data:`INFEASIBLE` otherwise.
    ``time_to_best_s`` is the elapsed time at the last improvement of
    ``best_cost`` (0.0 when the initial assignment was never improved on).
    ``improvement_trace`` lists ``(elapsed_s, cost)`` for every improvement,
    including the initial feasible assignment at time 0.0; its costs are
    strictly decreasing.
    """

    status: RunStatus
    best_cost: Union[int, float]
    best_assignment: Optional[List[bool]]
    flips: int
    elapsed_s: float
    time_to_best_s: float
    improvement_trace: List[Tuple[float, int]] = field(default_factory=list)


def sample_falsified_clauses(
    state: SearchState, sc_num: int, rng: random.Random
) -> List[int]:
    """``sc_num`` clause ids drawn uniformly with replacement.

    Draws from the falsified hard clauses when any exist, else from the
    falsified soft clauses.  Raises ValueError when nothing is falsified.
    """
    pool = state.falsified_hard.items
    if not pool:
        pool = state.falsified_soft.items
    if not pool:
        raise ValueError("no falsified clauses to sample")
    k = len(pool)
    r = rng.random
    return [pool[int(r() * k)] for _ in range(sc_num)]


def bms_pick(
    candidates: Sequence[int],
    scores,
    sv_num: int,
    rng: random.Random,
) -> int:
    """Best of ``sv_num`` uniform draws with replacement from ``candidates``.

    ``scores`` is anything subscriptable by variable (the engine's score
    list, or a mapping of probed scores).  Ties go to the earliest drawn
    maximum.  A singleton is returned without consuming randomness.
    Raises ValueError on an empty candidate set.
    """
    k = len(candidates)
    if k == 0:
        raise ValueError("bms_pick over an empty candidate set")
    if k == 1:
        return candidates[0]
    vals = [scores[v] for v in candidates]
    r = rng.random
    i = int(r() * k)
    best = candidates[i]
    best_score = vals[i]
    for _ in range(sv_num - 1):
        i = int(r() * k)
        s = vals[i]
        if s > best_score:
            best = candidates[i]
            best_score = s
    return best


def _random_walk_escape(state: SearchState, rng: random.Random) -> bool:
    """Flip the best-scoring variable of a random falsified clause.

    Falsified hard clauses take priority; ties on score are broken
    uniformly at random.  Returns False when nothing is falsified.
    """
    if state.falsified_hard.items:
        c = state.falsified_hard.choose(rng)
    elif state.falsified_soft.items:
        c = state.falsified_soft.choose(rng)
    else:
        return False
    score = state.score
    best_score = None
    ties: List[int] = []
    for lit in state.lits[c]:
        y = lit if lit > 0 else -lit
        s = score[y]
        if best_score is None or s > best_score:
            best_score = s
            ties = [y]
        elif s == best_score:
            ties.append(y)
    x = ties[0] if len(ties) == 1 else ties[rng.randrange(len(ties))]
    state.flip(x)
    return True


def single_flip_step(
    state: SearchState, config: SolverConfig, rng: random.Random
) -> bool:
    """One step of the baseline.  Returns False when every clause holds."""
    gv = state.good_vars
    if gv.items:
        state.flip(gv.choose(rng))
        return True
    if not state.falsified_hard.items and not state.falsified_soft.items:
        return False
    state.update_weights(rng)
    return _random_walk_escape(state, rng)


def fps_step(
    state: SearchState, config: SolverConfig, rng: random.Random
) -> bool:
    """One step of the look-ahead strategy.

    Returns False when every clause holds (nothing to do).  Otherwise flips
    either one variable or a candidate/partner pair and returns True.
    """
    gv = state.good_vars
    if gv.items:
        if not config.lookahead_always:
            state.flip(gv.choose(rng))
            return True
    else:
        if not state.falsified_hard.items and not state.falsified_soft.items:
            return False
        state.update_weights(rng)

    score = state.score
    pool = state.falsified_hard.items
    if not pool:
        pool = state.falsified_soft.items
    k = len(pool)

    # First-level candidates: sc_num falsified clauses drawn uniformly with
    # replacement (hard ones take priority), one random variable from each,
    # deduplicated in sampling order.  Not refilled after dedup.
    fv: List[int] = []
    seen = set()
    clause_vars = state.clause_vars
    r = rng.random
    for _ in range(config.sc_num):
        members = clause_vars[pool[int(r() * k)]]
        y = members[int(r() * len(members))]
        if y not in seen:
            seen.add(y)
            fv.append(y)

    v1 = fv[0]
    s1 = score[v1]
    for y in fv[1:]:
        s = score[y]
        if s > s1:
            v1 = y
            s1 = s

    best_pair: Optional[Tuple[int, int]] = None
    s2 = None
    early_stop = config.early_stop
    sv_num = config.sv_num
    probe = state.probed_positive_scores
    for cand in fv:
        # Pseudo-flip cand without mutating: collect the variables whose
        # score turns positive and pick the partner among them.
        pos = probe(cand)
        if not pos:
            continue
        partner = bms_pick(list(pos), pos, sv_num, rng)
        combined = score[cand] + pos[partner]
        if early_stop and combined > 0:
            state.flip(cand)
            state.flip(partner)
            return True
        if s2 is None or combined > s2:
            s2 = combined
            best_pair = (cand, partner)

    if config.escape is EscapePolicy.RANDOM_WALK:
        return _random_walk_escape(state, rng)
    if not early_stop and best_pair is not None and s2 > 0:
        # With early stop disabled an improving pair still takes
        # precedence, even over a single flip of equal or better score.
        state.flip(best_pair[0])
        state.flip(best_pair[1])
        return True
    if best_pair is None or s1 > s2:
        state.flip(v1)
    else:
        state.flip(best_pair[0])
        state.flip(best_pair[1])
    return True


def solve(
    formula: Formula,
    config: Optional[SolverConfig] = None,
    on_improvement: Optional[Callable[[int, float], None]] = None,
) -> RunResult:
    """Run local search until the time limit or flip budget is exhausted.

    ``on_improvement(cost, elapsed_s)`` fires whenever the best feasible
    cost improves, including for a feasible initial assignment.  The best
    solution is re-verified against the formula from scratch before being
    returned; a mismatch with the incremental bookkeeping raises
    RuntimeError.
    """
    if config is None:
        config = SolverConfig()
    rng = random.Random(config.seed)
    weighting = config.weighting
    if weighting is None:
        weighting = WeightingParams.defaults_for(formula)
    state = SearchState(formula, weighting, rng)
    step = (
        single_flip_step
        if config.strategy is Strategy.SINGLE_FLIP
        else fps_step
    )

    t0 = time.perf_counter()
    trace: List[Tuple[float, int]] = []
    time_to_best = 0.0
    best_seen = state.best_cost
    if best_seen != INFEASIBLE:
        trace.append((0.0, int(best_seen)))
        if on_improvement is not None:
            on_improvement(int(best_seen), 0.0)

    max_flips = config.max_flips
    time_limit = config.time_limit
    while True:
        if max_flips is not None and state.flips >= max_flips:
            break
        now = time.perf_counter()
        if now - t0 >= time_limit:
            break
        if not step(state, config, rng):
            break
        cost = state.best_cost
        if cost < best_seen:
            best_seen = cost
            time_to_best = time.perf_counter() - t0
            trace.append((time_to_best, int(cost)))
            if on_improvement is not None:
                on_improvement(int(cost), time_to_best)

    elapsed = time.perf_counter() - t0
    best_assignment = state.best_assignment()
    if best_assignment is not None:
        actual = evaluate_cost(formula, best_assignment)
        if actual != state.best_cost:
            raise RuntimeError(
                f"best solution failed re-verification: tracked "
                f"{state.best_cost}, actual {actual}"
            )
        status = RunStatus.FEASIBLE
    else:
        status = RunStatus.NO_FEASIBLE_FOUND
    return RunResult(
        status=status,
        best_cost=state.best_cost if best_assignment is not None else INFEASIBLE,
        best_assignment=best_assignment,
        flips=state.flips,
        elapsed_s=elapsed,
        time_to_best_s=time_to_best,
        improvement_trace=trace,
    )
