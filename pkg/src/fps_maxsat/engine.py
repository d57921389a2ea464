"""Mutable search state with incremental score maintenance.

The state tracks, per clause, its dynamic weight and the number of satisfying
literals; per variable, the score (change in total dynamic weight of
satisfied clauses if that variable were flipped); and three index sets:
falsified hard clauses, falsified soft clauses, and ``good_vars`` (variables
with strictly positive score).

A flip touches only the clauses containing the flipped variable.  Critical
variables (the single satisfying variable of a clause with one true literal)
are cached so that a 2-to-1 transition needs one clause scan and everything
else is O(1) per touched clause.

Pseudo flips (:meth:`SearchState.begin_probe` / :meth:`SearchState.end_probe`)
apply a flip and undo it exactly, without touching the flip counter or the
best-solution bookkeeping.  Probes do not nest.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .formula import INFEASIBLE, ClauseKind, Formula


@dataclass(frozen=True)
class WeightingParams:
    """Constants of the dynamic clause weighting scheme.

    ``hard_init`` is the initial dynamic weight of hard clauses and
    ``soft_init_from_weight`` selects whether soft clauses start at their
    original weight (weighted scheme) or at 1 (unweighted scheme).
    Increments are applied to falsified clauses at local optima; a soft
    clause's weight is only incremented while below ``soft_cap``.  With
    probability ``sp`` a weight update smooths instead: every satisfied
    clause above its initial weight loses 1.
    """

    h_inc: int = 1
    s_inc: int = 1
    sp: float = 0.01
    soft_cap: int = 100
    hard_init: int = 1
    soft_init_from_weight: bool = False

    def __post_init__(self) -> None:
        if self.h_inc < 1 or self.s_inc < 1:
            raise ValueError("weight increments must be >= 1")
        if not 0.0 <= self.sp <= 1.0:
            raise ValueError(f"smoothing probability out of range: {self.sp}")
        if self.soft_cap < 1 or self.hard_init < 1:
            raise ValueError("soft_cap and hard_init must be >= 1")

    @classmethod
    def defaults_for(cls, formula: Formula) -> "WeightingParams":
        """Scheme constants keyed to the instance family.

        Unweighted: all weights start at 1, both increments 1, cap 100.
        Weighted: soft clauses start at their original weight with cap
        10x the largest original weight; hard clauses start at the ceiling
        of the mean original soft weight, which is also the hard increment.
        """
        if not formula.is_weighted:
            return cls()
        softs = [
            c.weight
            for c in formula.clauses
            if c.kind is ClauseKind.SOFT
        ]
        if softs:
            hard_init = max(1, math.ceil(sum(softs) / len(softs)))
            cap = 10 * max(softs)
        else:
            hard_init = 1
            cap = 100
        return cls(
            h_inc=hard_init,
            s_inc=1,
            sp=0.01,
            soft_cap=cap,
            hard_init=hard_init,
            soft_init_from_weight=True,
        )


class IndexedSet:
    """Set of ints with O(1) add/discard/contains and O(1) uniform choice.

    Backed by a dense list plus a position map; removal swaps the last
    element into the hole, so iteration order is unspecified.
    """

    __slots__ = ("items", "pos")

    def __init__(self, initial: Sequence[int] = ()) -> None:
        self.items: List[int] = list(initial)
        self.pos = {x: i for i, x in enumerate(self.items)}

    def add(self, x: int) -> None:
        if x not in self.pos:
            self.pos[x] = len(self.items)
            self.items.append(x)

    def discard(self, x: int) -> None:
        i = self.pos.pop(x, None)
        if i is None:
            return
        last = self.items.pop()
        if last != x:
            self.items[i] = last
            self.pos[last] = i

    def choose(self, rng: random.Random) -> int:
        items = self.items
        # int(random() * k) is the draw random.choices uses; random() < 1
        # guarantees the index stays in range.
        return items[int(rng.random() * len(items))]

    def __contains__(self, x: int) -> bool:
        return x in self.pos

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __repr__(self) -> str:
        return f"IndexedSet({sorted(self.items)!r})"


class ProbeToken:
    """Handle for an open pseudo flip; pass back to ``end_probe``."""

    __slots__ = ("var",)

    def __init__(self, var: int) -> None:
        self.var = var


class SearchState:
    """Incremental assignment state over a fixed formula.

    Variables are 1-based internally: ``assign[0]`` is unused padding.
    ``score[x]`` is the gain in total dynamic weight of satisfied clauses
    from flipping ``x``; ``good_vars`` holds exactly the variables with
    positive score.  ``best_cost``/``best_assign`` track the cheapest
    feasible assignment seen so far (including the initial one).
    """

    __slots__ = (
        "formula",
        "weighting",
        "num_vars",
        "lits",
        "clause_vars",
        "is_hard",
        "soft_weight",
        "pos_occ",
        "neg_occ",
        "dyn_weight",
        "init_weight",
        "assign",
        "sat_count",
        "crit_var",
        "score",
        "falsified_hard",
        "falsified_soft",
        "good_vars",
        "soft_falsified_weight",
        "flips",
        "best_cost",
        "best_assign",
        "_offset",
        "_never_feasible",
        "_probe_open",
    )

    def __init__(
        self,
        formula: Formula,
        weighting: Optional[WeightingParams] = None,
        rng: Optional[random.Random] = None,
        assignment: Optional[Sequence[bool]] = None,
    ) -> None:
        if weighting is None:
            weighting = WeightingParams.defaults_for(formula)
        self.formula = formula
        self.weighting = weighting
        n = formula.num_vars
        self.num_vars = n

        lits: List[Tuple[int, ...]] = []
        clause_vars: List[Tuple[int, ...]] = []
        is_hard: List[bool] = []
        soft_weight: List[int] = []
        dyn_weight: List[int] = []
        pos_occ: List[List[int]] = [[] for _ in range(n + 1)]
        neg_occ: List[List[int]] = [[] for _ in range(n + 1)]
        for c, clause in enumerate(formula.clauses):
            ints = clause.ints()
            lits.append(ints)
            clause_vars.append(tuple(lit.var for lit in clause.literals))
            hard = clause.kind is ClauseKind.HARD
            is_hard.append(hard)
            soft_weight.append(0 if hard else clause.weight)
            if hard:
                dyn_weight.append(weighting.hard_init)
            elif weighting.soft_init_from_weight:
                dyn_weight.append(clause.weight)
            else:
                dyn_weight.append(1)
            for lit in ints:
                if lit > 0:
                    pos_occ[lit].append(c)
                else:
                    neg_occ[-lit].append(c)
        self.lits = lits
        self.clause_vars = clause_vars
        self.is_hard = is_hard
        self.soft_weight = soft_weight
        self.dyn_weight = dyn_weight
        self.init_weight = dyn_weight.copy()
        self.pos_occ = pos_occ
        self.neg_occ = neg_occ

        if assignment is not None:
            if len(assignment) != n:
                raise ValueError(
                    f"assignment length {len(assignment)} != num_vars {n}"
                )
            assign = [False] + [bool(v) for v in assignment]
        else:
            if rng is None:
                raise ValueError("rng is required when no assignment is given")
            assign = [False] + [rng.random() < 0.5 for _ in range(n)]
        self.assign = assign

        sat_count = [0] * len(lits)
        crit_var = [0] * len(lits)
        score = [0] * (n + 1)
        self.falsified_hard = IndexedSet()
        self.falsified_soft = IndexedSet()
        soft_falsified = 0
        for c, clause_lits in enumerate(lits):
            cnt = 0
            last_true = 0
            for lit in clause_lits:
                if lit > 0:
                    if assign[lit]:
                        cnt += 1
                        last_true = lit
                elif not assign[-lit]:
                    cnt += 1
                    last_true = -lit
            sat_count[c] = cnt
            if cnt == 0:
                w = dyn_weight[c]
                for lit in clause_lits:
                    score[lit if lit > 0 else -lit] += w
                if is_hard[c]:
                    self.falsified_hard.add(c)
                else:
                    self.falsified_soft.add(c)
                    soft_falsified += soft_weight[c]
            elif cnt == 1:
                crit_var[c] = last_true
                score[last_true] -= dyn_weight[c]
        self.sat_count = sat_count
        self.crit_var = crit_var
        self.score = score
        self.soft_falsified_weight = soft_falsified
        self.good_vars = IndexedSet(
            [x for x in range(1, n + 1) if score[x] > 0]
        )

        self._offset = formula.soft_offset
        self._never_feasible = formula.has_empty_hard
        self._probe_open: Optional[ProbeToken] = None
        self.flips = 0
        self.best_cost: float = INFEASIBLE
        self.best_assign: Optional[List[bool]] = None
        self._note_candidate()

    # -- cost views ---------------------------------------------------

    @property
    def current_cost(self):
        """Cost of the current assignment (INFEASIBLE if a hard clause fails)."""
        if self._never_feasible or self.falsified_hard.items:
            return INFEASIBLE
        return self.soft_falsified_weight + self._offset

    def current_assignment(self) -> List[bool]:
        """Copy of the current assignment, 0-based (index i is variable i+1)."""
        return self.assign[1:]

    def best_assignment(self) -> Optional[List[bool]]:
        """Copy of the best feasible assignment seen, or None."""
        if self.best_assign is None:
            return None
        return self.best_assign[1:]

    def _note_candidate(self) -> None:
        if self._never_feasible or self.falsified_hard.items:
            return
        cost = self.soft_falsified_weight + self._offset
        if cost < self.best_cost:
            self.best_cost = cost
            self.best_assign = self.assign.copy()

    # -- flips ----------------------------------------------------------

    def flip(self, x: int) -> None:
        """Flip variable ``x``, update all incremental structures.

        Counts toward ``flips`` and may update the best solution.  Not
        allowed while a probe is open.
        """
        if self._probe_open is not None:
            raise RuntimeError("flip while a probe is open")
        if not 1 <= x <= self.num_vars:
            raise ValueError(f"variable {x} out of range 1..{self.num_vars}")
        self._apply_flip(x)
        self.flips += 1
        if self.falsified_hard.items or self._never_feasible:
            return
        cost = self.soft_falsified_weight + self._offset
        if cost < self.best_cost:
            self.best_cost = cost
            self.best_assign = self.assign.copy()

    def begin_probe(self, x: int) -> ProbeToken:
        """Pseudo-flip ``x``: apply the flip without best/flip bookkeeping."""
        if self._probe_open is not None:
            raise RuntimeError("probes do not nest")
        if not 1 <= x <= self.num_vars:
            raise ValueError(f"variable {x} out of range 1..{self.num_vars}")
        self._apply_flip(x)
        token = ProbeToken(x)
        self._probe_open = token
        return token

    def end_probe(self, token: ProbeToken) -> None:
        """Undo the probe identified by ``token``, restoring the state."""
        if self._probe_open is None:
            raise RuntimeError("no probe is open")
        if token is not self._probe_open:
            raise RuntimeError("probe token does not match the open probe")
        self._probe_open = None
        self._apply_flip(token.var)

    def probed_positive_scores(self, x: int) -> Dict[int, int]:
        """Positive-score variables of the hypothetical state with ``x`` flipped.

        Read-only equivalent of begin_probe(x), collect good_vars with
        their scores, end_probe.  Only clause-mates of x can change score,
        so one pass over x's occurrence lists builds a small delta table;
        x itself flips sign (score'(x) = -score(x)).  Nothing is mutated,
        which makes this much cheaper than a real probe pair.
        """
        if not 1 <= x <= self.num_vars:
            raise ValueError(f"variable {x} out of range 1..{self.num_vars}")
        assign = self.assign
        score = self.score
        sat_count = self.sat_count
        dyn_weight = self.dyn_weight
        clause_vars = self.clause_vars
        delta: Dict[int, int] = {}
        get = delta.get
        if assign[x]:
            inc_list = self.neg_occ[x]
            dec_list = self.pos_occ[x]
        else:
            inc_list = self.pos_occ[x]
            dec_list = self.neg_occ[x]
        for c in inc_list:
            k = sat_count[c]
            if k == 0:
                # satisfied solely by x afterwards: members lose the make-gain
                w = dyn_weight[c]
                for y in clause_vars[c]:
                    if y != x:
                        delta[y] = get(y, 0) - w
            elif k == 1:
                # the old critical variable is freed
                z = self.crit_var[c]
                delta[z] = get(z, 0) + dyn_weight[c]
        lits = self.lits
        for c in dec_list:
            k = sat_count[c]
            if k == 1:
                # falsified afterwards: members gain the make-gain
                w = dyn_weight[c]
                for y in clause_vars[c]:
                    if y != x:
                        delta[y] = get(y, 0) + w
            elif k == 2:
                # the surviving true literal becomes critical
                for lit in lits[c]:
                    y = lit if lit > 0 else -lit
                    if y != x and assign[y] == (lit > 0):
                        delta[y] = get(y, 0) - dyn_weight[c]
                        break
        pos: Dict[int, int] = {}
        for y, d in delta.items():
            s = score[y] + d
            if s > 0:
                pos[y] = s
        for y in self.good_vars.items:
            if y != x and y not in delta:
                pos[y] = score[y]
        sx = -score[x]
        if sx > 0:
            pos[x] = sx
        return pos

    def _apply_flip(self, x: int) -> None:
        # Hot path.  Locals beat attribute loads, and the good_vars set
        # surgery is inlined: membership is exactly score > 0, so a
        # sign crossing tells us whether the variable is present.
        assign = self.assign
        new_val = not assign[x]
        assign[x] = new_val
        score = self.score
        sat_count = self.sat_count
        crit_var = self.crit_var
        dyn_weight = self.dyn_weight
        lits = self.lits
        clause_vars = self.clause_vars
        is_hard = self.is_hard
        gv = self.good_vars
        gv_items = gv.items
        gv_pos = gv.pos
        if new_val:
            inc_list = self.pos_occ[x]
            dec_list = self.neg_occ[x]
        else:
            inc_list = self.neg_occ[x]
            dec_list = self.pos_occ[x]

        for c in inc_list:
            k = sat_count[c]
            sat_count[c] = k + 1
            if k == 0:
                # Clause becomes satisfied, critically by x: every member
                # loses the make-gain, x additionally takes the break-loss.
                w = dyn_weight[c]
                for y in clause_vars[c]:
                    s = score[y]
                    score[y] = s - w
                    if 0 < s <= w:
                        i = gv_pos.pop(y)
                        last = gv_items.pop()
                        if last != y:
                            gv_items[i] = last
                            gv_pos[last] = i
                s = score[x]
                score[x] = s - w
                if 0 < s <= w:
                    i = gv_pos.pop(x)
                    last = gv_items.pop()
                    if last != x:
                        gv_items[i] = last
                        gv_pos[last] = i
                crit_var[c] = x
                if is_hard[c]:
                    self.falsified_hard.discard(c)
                else:
                    self.falsified_soft.discard(c)
                    self.soft_falsified_weight -= self.soft_weight[c]
            elif k == 1:
                # No longer critical: the old critical variable is freed.
                z = crit_var[c]
                s = score[z]
                ns = s + dyn_weight[c]
                score[z] = ns
                if ns > 0 >= s:
                    gv_pos[z] = len(gv_items)
                    gv_items.append(z)

        for c in dec_list:
            k = sat_count[c]
            sat_count[c] = k - 1
            if k == 1:
                # Clause becomes falsified: every member gains the make-gain,
                # x additionally sheds the break-loss it held as critical.
                w = dyn_weight[c]
                for y in clause_vars[c]:
                    s = score[y]
                    ns = s + w
                    score[y] = ns
                    if ns > 0 >= s:
                        gv_pos[y] = len(gv_items)
                        gv_items.append(y)
                s = score[x]
                ns = s + w
                score[x] = ns
                if ns > 0 >= s:
                    gv_pos[x] = len(gv_items)
                    gv_items.append(x)
                if is_hard[c]:
                    self.falsified_hard.add(c)
                else:
                    self.falsified_soft.add(c)
                    self.soft_falsified_weight += self.soft_weight[c]
            elif k == 2:
                # Clause becomes critical: find the surviving true literal.
                for lit in lits[c]:
                    y = lit if lit > 0 else -lit
                    if y != x and assign[y] == (lit > 0):
                        w = dyn_weight[c]
                        s = score[y]
                        score[y] = s - w
                        if 0 < s <= w:
                            i = gv_pos.pop(y)
                            last = gv_items.pop()
                            if last != y:
                                gv_items[i] = last
                                gv_pos[last] = i
                        crit_var[c] = y
                        break

    # -- weighting ------------------------------------------------------

    def update_weights(self, rng: random.Random) -> None:
        """One dynamic-weighting step, called at local optima.

        With probability ``sp`` smooths (every satisfied clause above its
        initial weight loses 1); otherwise bumps every falsified hard
        clause by ``h_inc`` and every falsified soft clause below
        ``soft_cap`` by ``s_inc``.  Scores and ``good_vars`` are kept
        consistent.
        """
        if self._probe_open is not None:
            raise RuntimeError("weight update while a probe is open")
        wp = self.weighting
        score = self.score
        gv = self.good_vars
        dyn_weight = self.dyn_weight
        if rng.random() < wp.sp:
            sat_count = self.sat_count
            init_weight = self.init_weight
            crit_var = self.crit_var
            for c in range(len(dyn_weight)):
                if sat_count[c] > 0 and dyn_weight[c] > init_weight[c]:
                    dyn_weight[c] -= 1
                    if sat_count[c] == 1:
                        z = crit_var[c]
                        s = score[z]
                        ns = s + 1
                        score[z] = ns
                        if ns > 0 and s <= 0:
                            gv.add(z)
            return
        clause_vars = self.clause_vars
        gv_items = gv.items
        gv_pos = gv.pos
        h_inc = wp.h_inc
        for c in self.falsified_hard.items:
            dyn_weight[c] += h_inc
            for y in clause_vars[c]:
                s = score[y]
                ns = s + h_inc
                score[y] = ns
                if ns > 0 >= s:
                    gv_pos[y] = len(gv_items)
                    gv_items.append(y)
        s_inc = wp.s_inc
        cap = wp.soft_cap
        for c in self.falsified_soft.items:
            if dyn_weight[c] >= cap:
                continue
            dyn_weight[c] += s_inc
            for y in clause_vars[c]:
                s = score[y]
                ns = s + s_inc
                score[y] = ns
                if ns > 0 >= s:
                    gv_pos[y] = len(gv_items)
                    gv_items.append(y)
