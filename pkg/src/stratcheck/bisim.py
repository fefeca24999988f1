"""Alternating-simulation and bisimulation checks between two models.

A candidate relation pairs states of a left and a right model. It is
supplied as descriptor lines over local-state profiles; each line is
expanded to every concrete (left state, right state) combination whose
profiles match, in (line, left index, right index) order, and the
checks below walk the expanded pairs in exactly that order.

For a coalition A, a pair (q, r) passes one direction of the check when

* valuation: q and r agree on every proposition declared in both
  models (compared by name, in the left model's declaration order);
* epistemic: every state the coalition cannot tell apart from q has a
  related counterpart among the states it cannot tell apart from r;
* strategic: for every consistent joint choice of the coalition at q
  there is a consistent joint choice at r whose successors are all
  covered: each successor of r is related to some successor of q under
  the chosen pair of joint choices.

A joint choice fixes one available action per coalition member (the
stutter action when a member has none). It keeps an edge when every
member owning the edge's action picked exactly that action, and it is
consistent at a state when it keeps at least one edge; inconsistent
choices impose no obligation and offer no response. A deadlocked state
keeps its stutter self-loop under every joint choice, which makes the
stutter step the unique behaviour there.

The full bisimulation check requires the two initial states to be
paired and runs the one-directional check left-to-right, then
right-to-left over the inverted pairs. The first failed condition is
reported with the offending pair and a short witness: the proposition
name, the unmatched indistinguishable state, or the unanswerable joint
choice. In strict mode the right-hand response must be uniform: once a
joint choice is answered for some pair of local-state profiles, every
later pair with the same profiles must accept the same answer.
"""

from dataclasses import dataclass
from itertools import product

from .model import EPSILON, coalition_neighborhood


def joint_choices(model, coalition, state_idx):
    """All joint choices of `coalition` at a state, in declaration order.

    Each choice is a tuple of action names aligned with the coalition;
    a member with no available action contributes the stutter action.
    """
    st = model.states[state_idx]
    axes = []
    for name in coalition:
        ai = model.amas.agent_index(name)
        avail = model.amas.agents[ai].avail[st.locals[ai]]
        axes.append(avail if avail else (EPSILON,))
    return [tuple(chi) for chi in product(*axes)]


class _Side:
    """Per-model data shared by all pair checks: adjacency, coalition
    member indices, and caches for choices, successors and
    neighborhoods."""

    def __init__(self, model, coalition):
        self.model = model
        self.coalition = tuple(coalition)
        self.members = tuple(model.amas.agent_index(a) for a in coalition)
        self.adj = [[] for _ in range(model.n_states())]
        for src, act, dst in model.edges:
            self.adj[src].append((act, dst))
        self._choices = {}
        self._succ = {}
        self._nbhd = {}

    def profile(self, idx):
        st = self.model.states[idx]
        return tuple(st.locals[ai] for ai in self.members)

    def choices(self, idx):
        key = self.profile(idx)
        got = self._choices.get(key)
        if got is None:
            got = joint_choices(self.model, self.coalition, idx)
            self._choices[key] = got
        return got

    def successors(self, idx, chi):
        """Destinations of the edges `chi` keeps at `idx` (may be empty)."""
        key = (idx, chi)
        got = self._succ.get(key)
        if got is None:
            owners = self.model.amas.owners
            got = []
            for act, dst in self.adj[idx]:
                own = owners.get(act)
                if own:
                    ok = True
                    for pos, ai in enumerate(self.members):
                        if ai in own and chi[pos] != act:
                            ok = False
                            break
                    if not ok:
                        continue
                got.append(dst)
            self._succ[key] = got
        return got

    def neighborhood(self, idx):
        got = self._nbhd.get(idx)
        if got is None:
            got = coalition_neighborhood(self.model, self.coalition, idx)
            self._nbhd[idx] = got
        return got


@dataclass
class SimViolation:
    condition: str  # "valuation" | "epistemic" | "strategic"
    left: int  # state index in the checked direction's left model
    right: int
    detail: str


def check_simulation(left, right, pairs, coalition, strict=False):
    """Check one direction of the simulation over `pairs`, in order.

    Returns None when every pair passes, otherwise the first
    SimViolation. `pairs` are (left index, right index) tuples and the
    relation used for matching is exactly their set.
    """
    ls = _Side(left, coalition)
    rs = _Side(right, coalition)
    rel = set(pairs)
    partners = {}
    for li, ri in pairs:
        partners.setdefault(li, []).append(ri)
    shared = [p for p in left.amas.propositions if p in right.amas.propositions]
    lprop = {p: i for i, p in enumerate(left.amas.propositions)}
    rprop = {p: i for i, p in enumerate(right.amas.propositions)}
    committed = {}

    for li, ri in pairs:
        lst = left.states[li]
        rst = right.states[ri]
        for p in shared:
            if lst.store[lprop[p]] != rst.store[rprop[p]]:
                return SimViolation("valuation", li, ri, p)

        rn = set(rs.neighborhood(ri))
        for q2 in ls.neighborhood(li):
            if not any(r2 in rn for r2 in partners.get(q2, ())):
                return SimViolation("epistemic", li, ri,
                                    "(%s)" % left.state_label(q2))

        for chi in ls.choices(li):
            succ_l = ls.successors(li, chi)
            if not succ_l:
                continue  # inconsistent choice, no obligation
            key = (ls.profile(li), rs.profile(ri), chi)
            if strict and key in committed:
                candidates = [committed[key]]
            else:
                candidates = rs.choices(ri)
            answered = None
            for chi2 in candidates:
                succ_r = rs.successors(ri, chi2)
                if not succ_r:
                    continue
                if all(any((q2, r2) in rel for q2 in succ_l) for r2 in succ_r):
                    answered = chi2
                    break
            if answered is None:
                return SimViolation("strategic", li, ri, ",".join(chi))
            if strict:
                committed.setdefault(key, answered)
    return None


@dataclass
class BisimVerdict:
    ok: bool
    pairs_checked: int
    condition: str = None
    direction: str = None
    pair: tuple = None  # (left label, right label), call orientation
    detail: str = None

    def record(self):
        if self.ok:
            return {"ok": True, "pairs": self.pairs_checked}
        return {
            "ok": False,
            "condition": self.condition,
            "direction": self.direction,
            "pair": list(self.pair),
            "detail": self.detail,
        }


def _pair_label(model, idx):
    return "(%s)" % model.state_label(idx)


def expand_relation(left, right, relspec):
    """Concrete (left index, right index) pairs for a descriptor relation.

    Each descriptor line multiplies out over every state carrying its
    local profile on each side (profiles recur with different stores),
    ordered by line, then left index, then right index.
    """
    pairs = []
    for lt, rt in relspec.pairs:
        for li in left.states_with_locals(lt):
            for ri in right.states_with_locals(rt):
                pairs.append((li, ri))
    return pairs


def check_a_bisimulation(left, right, pairs, coalition, strict=False):
    """Both-direction check anchored at the initial states.

    The verdict carries the first failure: the missing initial pair,
    or the first condition broken while scanning pairs left-to-right,
    then the inverted pairs right-to-left. The reported pair is always
    (left model state, right model state).
    """
    for name in coalition:
        left.amas.agent_index(name)
        right.amas.agent_index(name)
    verdict = BisimVerdict(ok=True, pairs_checked=len(pairs))
    if (left.initial, right.initial) not in set(pairs):
        verdict.ok = False
        verdict.condition = "initial"
        verdict.direction = "L2R"
        verdict.pair = (_pair_label(left, left.initial),
                        _pair_label(right, right.initial))
        verdict.detail = "missing"
        return verdict

    v = check_simulation(left, right, pairs, coalition, strict=strict)
    if v is not None:
        verdict.ok = False
        verdict.condition = v.condition
        verdict.direction = "L2R"
        verdict.pair = (_pair_label(left, v.left), _pair_label(right, v.right))
        verdict.detail = v.detail
        return verdict

    inverted = [(ri, li) for li, ri in pairs]
    v = check_simulation(right, left, inverted, coalition, strict=strict)
    if v is not None:
        verdict.ok = False
        verdict.condition = v.condition
        verdict.direction = "R2L"
        verdict.pair = (_pair_label(left, v.right), _pair_label(right, v.left))
        verdict.detail = v.detail
        return verdict
    return verdict
