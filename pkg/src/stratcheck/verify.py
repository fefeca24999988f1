"""Verification engines for coalition objectives.

A coalition wins a formula `<<A>> obj` when one uniform memoryless strategy
(one action per member and local state, taken regardless of where in its
observation class the member actually is) forces `obj` on every path from
every state in the coalition's one-step neighborhood of the initial state.
The scheduler resolves all remaining nondeterminism adversarially, and a
state whose outgoing transitions are all blocked stutters in place.

Engines:

- `verify_bruteforce` enumerates strategies in declaration order and checks
  each against the adversary with the array kernels. Exact.
- `fixpoint_upper` drops the uniformity requirement (each state picks its own
  coalition action). Overapproximates: a `false` here is a real `false`.
- `fixpoint_lower` grows a winning region with per-(member, local) action
  commitments certified across observation neighborhoods, then re-checks the
  extracted strategy before answering. Underapproximates: `true` is real.
- `verify_approx` sandwiches the answer between the two fixpoints and says
  `inconclusive` when they disagree.
- `verify_dfs` explores partial strategies, refuting whole subtrees from the
  fragment of the model their assignments already determine, and memoizes
  refutation cores. Exact; agrees with `verify_bruteforce`.

`prune_model` and `eval_objective` form a deliberately plain reference
evaluator for a single strategy. They share no code with the enumerator's
kernel path, so certificate re-checks through them are independent evidence.
"""

import itertools
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import StrategySpaceExceeded, VerificationTimeout
from .model import EPSILON, coalition_neighborhood
from .spec_lang import And, FormulaAst, Lit, Not, Or, Prop, parse_formula, pretty_formula

DEFAULT_STRATEGY_LIMIT = 10 ** 7

# sentinel action id for "member takes no action"; real ids are >= 0
_EPS_ID = -1


@dataclass
class VerifyResult:
    formula: str
    coalition: list
    method: str
    result: object  # True, False, or "inconclusive"
    strategy: dict  # agent -> {local -> action}, None unless a witness exists
    stats: dict
    wall_time: float  # reported on stderr only, never part of the record

    def record(self):
        """JSON-ready result; deterministic across runs (no timing)."""
        return {
            "formula": self.formula,
            "coalition": list(self.coalition),
            "method": self.method,
            "result": self.result,
            "strategy": self.strategy,
            "stats": self.stats,
        }


def _resolve(model, formula, coalition):
    f = formula if formula is not None else model.amas.formula
    if isinstance(f, str):
        f = parse_formula(f)
    coal = tuple(coalition) if coalition else tuple(f.coalition)
    for name in coal:
        model.amas.agent_index(name)  # raises UnknownReference
    shown = FormulaAst(coalition=coal, op=f.op, arg1=f.arg1, arg2=f.arg2)
    return f, coal, pretty_formula(shown)


def _deadline(timeout):
    return None if timeout is None else time.monotonic() + timeout


def _check_deadline(deadline, what):
    if deadline is not None and time.monotonic() >= deadline:
        raise VerificationTimeout("%s timed out" % what)


def _bool_mask(model, expr):
    n = model.n_states()
    if isinstance(expr, Lit):
        return np.full(n, expr.value, dtype=bool)
    if isinstance(expr, Prop):
        j = model.amas.propositions.index(expr.name)
        return model.props_mat[:, j].copy()
    if isinstance(expr, Not):
        return ~_bool_mask(model, expr.arg)
    if isinstance(expr, And):
        return _bool_mask(model, expr.left) & _bool_mask(model, expr.right)
    if isinstance(expr, Or):
        return _bool_mask(model, expr.left) | _bool_mask(model, expr.right)
    raise TypeError("not a boolean expression: %r" % (expr,))


def _starts_mask(model, coal):
    starts = np.zeros(model.n_states(), dtype=bool)
    for i in coalition_neighborhood(model, coal, model.initial):
        starts[i] = True
    return starts


def _slots(model, coal):
    """(agent_idx, local_idx) slots in coalition-then-declaration order,
    with each slot's choices as action ids (the ε sentinel when the local
    has no outgoing transition)."""
    amas = model.amas
    slots = []
    domains = []
    for name in coal:
        ai = amas.agent_index(name)
        agent = amas.agents[ai]
        for li in range(len(agent.locals)):
            acts = agent.avail[li]
            slots.append((ai, li))
            if acts:
                domains.append([model.action_id(a) for a in acts])
            else:
                domains.append([_EPS_ID])
    return slots, domains


def strategy_space(model, coalition=None):
    """Number of uniform strategies the coalition has."""
    _, coal, _ = _resolve(model, None, coalition)
    _, domains = _slots(model, coal)
    total = 1
    for d in domains:
        total *= len(d)
    return total


def _strategy_dict(model, coal, slots, domains, digits):
    amas = model.amas
    out = {name: {} for name in coal}
    by_agent = {amas.agent_index(name): name for name in coal}
    for k, (ai, li) in enumerate(slots):
        aid = domains[k][digits[k]]
        act = EPSILON if aid == _EPS_ID else model.action_names[aid]
        out[by_agent[ai]][amas.agents[ai].locals[li]] = act
    return out


class _Evaluator:
    """Vectorized single-strategy objective check over the CSR edge list."""

    def __init__(self, model, coal):
        amas = model.amas
        self.model = model
        self.n = model.n_states()
        # `holds` derives CSR row offsets from per-source counts, which is
        # only right when edges are grouped by ascending source; reduced
        # models list edges in discovery order, so group them here once
        order = np.argsort(model.edge_src, kind="stable")
        self.src = model.edge_src[order]
        self.dst = model.edge_dst[order]
        self.act = model.edge_act[order]
        self.member_owns = []
        self.member_loc = []
        for name in coal:
            ai = amas.agent_index(name)
            owned = np.array(
                [model.action_id(a) for a in amas.actions if ai in amas.owners[a]],
                dtype=np.int64)
            self.member_owns.append(np.isin(self.act, owned))
            self.member_loc.append(model.locals_mat[self.src, ai])
        self.all_states = np.ones(self.n, dtype=bool)

    def kept_edges(self, choice_vectors):
        """choice_vectors: per member, action id per local (ε sentinel blocks
        every owned edge). An edge survives when every member owning its
        action has chosen exactly that action at the edge's source local."""
        kept = np.ones(self.src.shape[0], dtype=bool)
        for owns, loc, choice in zip(self.member_owns, self.member_loc,
                                     choice_vectors):
            kept &= ~owns | (choice[loc] == self.act)
        return kept

    def holds(self, op, m1, m2, starts, kept):
        """Evaluate the objective on the kept submodel. Returns
        (all paths from all starts satisfy it, states visited)."""
        srck = self.src[kept]
        dstk = self.dst[kept]
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(srck, minlength=self.n), out=indptr[1:])
        # a state with no kept edge stutters in place
        sink = np.diff(indptr) == 0

        if op == "X":
            bad = bool((starts & sink & ~m1).any())
            from_start = starts[srck]
            bad = bad or bool((from_start & ~m1[dstk]).any())
            return not bad, int(starts.sum())
        if op == "G":
            vis = kernels.gated_reach(indptr, dstk, starts,
                                      self.all_states, self.all_states)
            return not bool((vis & ~m1).any()), int(vis.sum())
        if op == "F":
            avoid = ~m1
            region = kernels.gated_reach(indptr, dstk, starts, avoid, avoid)
            trapped = bool((region & sink).any()) or \
                kernels.has_cycle_in(indptr, dstk, region)
            return not trapped, int(region.sum())
        if op == "U":
            visit = ~m2
            region = kernels.gated_reach(indptr, dstk, starts, visit, m1 & visit)
            if bool((region & ~m1).any()):
                return False, int(region.sum())
            core = region & m1
            trapped = bool((core & sink).any()) or \
                kernels.has_cycle_in(indptr, dstk, core)
            return not trapped, int(region.sum())
        raise ValueError("unknown objective operator %r" % op)


def _objective_masks(model, obj):
    m1 = _bool_mask(model, obj.arg1)
    m2 = _bool_mask(model, obj.arg2) if obj.op == "U" else None
    return m1, m2


def verify_bruteforce(model, formula=None, coalition=None, timeout=None,
                      strategy_limit=DEFAULT_STRATEGY_LIMIT):
    """Try every uniform strategy in declaration order; first winner ends
    the search. Exact but exponential in the number of (member, local)
    slots."""
    t0 = time.monotonic()
    deadline = _deadline(timeout)
    obj, coal, shown = _resolve(model, formula, coalition)
    slots, domains = _slots(model, coal)
    total = 1
    for d in domains:
        total *= len(d)
        if total > strategy_limit:
            raise StrategySpaceExceeded(
                "strategy space exceeds %d" % strategy_limit)

    ev = _Evaluator(model, coal)
    m1, m2 = _objective_masks(model, obj)
    starts = _starts_mask(model, coal)

    amas = model.amas
    member_agents = [amas.agent_index(name) for name in coal]
    vectors = [np.full(len(amas.agents[ai].locals), _EPS_ID, dtype=np.int64)
               for ai in member_agents]
    slot_vec = []  # slot -> (vector position, local index)
    for ai, li in slots:
        slot_vec.append((member_agents.index(ai), li))

    digits = [0] * len(slots)
    for k, (mp, li) in enumerate(slot_vec):
        vectors[mp][li] = domains[k][0]

    examined = 0
    visited = 0
    while True:
        if examined % 256 == 0:
            _check_deadline(deadline, "bruteforce verification")
        examined += 1
        ok, seen = ev.holds(obj.op, m1, m2, starts, ev.kept_edges(vectors))
        visited += seen
        if ok:
            return VerifyResult(
                formula=shown, coalition=list(coal), method="bruteforce",
                result=True,
                strategy=_strategy_dict(model, coal, slots, domains, digits),
                stats={"strategies_examined": examined,
                       "strategy_space": total,
                       "states_visited": visited},
                wall_time=time.monotonic() - t0)
        # odometer step, rightmost slot fastest
        pos = len(digits) - 1
        while pos >= 0:
            digits[pos] += 1
            if digits[pos] < len(domains[pos]):
                mp, li = slot_vec[pos]
                vectors[mp][li] = domains[pos][digits[pos]]
                break
            digits[pos] = 0
            mp, li = slot_vec[pos]
            vectors[mp][li] = domains[pos][0]
            pos -= 1
        if pos < 0:
            return VerifyResult(
                formula=shown, coalition=list(coal), method="bruteforce",
                result=False, strategy=None,
                stats={"strategies_examined": examined,
                       "strategy_space": total,
                       "states_visited": visited},
                wall_time=time.monotonic() - t0)


# ---------------------------------------------------------------------------
# plain single-strategy reference (used to re-check certificates)

def _eval_bool(expr, store, prop_index):
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Prop):
        return store[prop_index[expr.name]]
    if isinstance(expr, Not):
        return not _eval_bool(expr.arg, store, prop_index)
    if isinstance(expr, And):
        return _eval_bool(expr.left, store, prop_index) and \
            _eval_bool(expr.right, store, prop_index)
    if isinstance(expr, Or):
        return _eval_bool(expr.left, store, prop_index) or \
            _eval_bool(expr.right, store, prop_index)
    raise TypeError("not a boolean expression: %r" % (expr,))


def prune_model(model, coalition, strategy):
    """Successor lists under a strategy: per state the (action, dst) pairs
    the strategy keeps, with a stutter loop where everything is blocked.
    `strategy` maps agent -> {local name -> action name or ε}."""
    amas = model.amas
    members = [(name, amas.agent_index(name)) for name in coalition]
    succ = []
    for i in range(model.n_states()):
        locs = model.states[i].locals
        out = []
        for s, a, d in model.edges:
            if s != i:
                continue
            owners = amas.owners.get(a, frozenset())
            keep = True
            for name, ai in members:
                if ai in owners:
                    local_name = amas.agents[ai].locals[locs[ai]]
                    if strategy[name].get(local_name) != a:
                        keep = False
                        break
            if keep:
                out.append((a, d))
        if not out:
            out = [(EPSILON, i)]
        succ.append(out)
    return succ


def eval_objective(model, pruned, starts, objective):
    """Does the objective hold on every path from every start in the pruned
    submodel? Plain python on purpose; see the module docstring."""
    if isinstance(objective, str):
        objective = parse_formula(objective)
    prop_index = {p: j for j, p in enumerate(model.amas.propositions)}

    def holds(expr, i):
        return _eval_bool(expr, model.states[i].store, prop_index)

    op = objective.op

    if op == "X":
        return all(holds(objective.arg1, d)
                   for s in starts for _, d in pruned[s])

    if op == "G":
        seen = set(starts)
        queue = list(starts)
        while queue:
            s = queue.pop()
            if not holds(objective.arg1, s):
                return False
            for _, d in pruned[s]:
                if d not in seen:
                    seen.add(d)
                    queue.append(d)
        return True

    if op == "F":
        # trapped iff a lasso avoids the target; stutter loops are real
        # edges here, so cycle detection alone covers blocked states
        region = {s for s in starts if not holds(objective.arg1, s)}
        queue = list(region)
        while queue:
            s = queue.pop()
            for _, d in pruned[s]:
                if not holds(objective.arg1, d) and d not in region:
                    region.add(d)
                    queue.append(d)
        return not _has_cycle(pruned, region)

    if op == "U":
        p1, p2 = objective.arg1, objective.arg2
        region = {s for s in starts if not holds(p2, s)}
        queue = [s for s in region if holds(p1, s)]
        for s in region:
            if not holds(p1, s):
                return False
        seen = set(region)
        while queue:
            s = queue.pop()
            for _, d in pruned[s]:
                if holds(p2, d) or d in seen:
                    continue
                seen.add(d)
                region.add(d)
                if not holds(p1, d):
                    return False
                queue.append(d)
        return not _has_cycle(pruned, region)

    raise ValueError("unknown objective operator %r" % op)


def _has_cycle(pruned, region):
    color = {s: 0 for s in region}
    for root in sorted(region):
        if color[root] != 0:
            continue
        stack = [(root, iter([d for _, d in pruned[root] if d in region]))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for d in it:
                if color[d] == 1:
                    return True
                if color[d] == 0:
                    color[d] = 1
                    stack.append((d, iter([x for _, x in pruned[d]
                                           if x in region])))
                    advanced = True
                    break
            if not advanced:
                color[node] = 2
                stack.pop()
    return False


# ---------------------------------------------------------------------------
# fixpoint approximations

def _adjacency(model):
    adj = [[] for _ in range(model.n_states())]
    for s, a, d in model.edges:
        adj[s].append((a, d))
    return adj


def fixpoint_upper(model, formula=None, coalition=None, timeout=None):
    """Perfect-information overapproximation: every state picks its own
    joint coalition action, uniformity is ignored. A `false` answer refutes
    the formula; `true` answers are not trustworthy on their own."""
    t0 = time.monotonic()
    deadline = _deadline(timeout)
    obj, coal, shown = _resolve(model, formula, coalition)
    amas = model.amas
    members = [amas.agent_index(name) for name in coal]
    n = model.n_states()
    adj = _adjacency(model)
    m1, m2 = _objective_masks(model, obj)

    def joint_choices(i):
        locs = model.states[i].locals
        per_member = []
        for ai in members:
            acts = amas.agents[ai].avail[locs[ai]]
            per_member.append(list(acts) if acts else [EPSILON])
        return itertools.product(*per_member)

    def successors(i, chi):
        out = []
        for a, d in adj[i]:
            owners = amas.owners.get(a, frozenset())
            if all(chi[k] == a for k, ai in enumerate(members) if ai in owners):
                out.append(d)
        return out

    winning = [bool(x) for x in (m2 if obj.op == "U" else m1)]
    rounds = 0

    if obj.op == "X":
        target = [bool(x) for x in m1]
        winning = [False] * n
        for i in range(n):
            for chi in joint_choices(i):
                succ = successors(i, chi)
                if (all(target[d] for d in succ) if succ else target[i]):
                    winning[i] = True
                    break
        rounds = 1
    elif obj.op == "G":
        changed = True
        while changed:
            rounds += 1
            _check_deadline(deadline, "upper fixpoint")
            changed = False
            for i in range(n):
                if not winning[i]:
                    continue
                stays = False
                for chi in joint_choices(i):
                    succ = successors(i, chi)
                    # blocked means stuttering inside the invariant
                    if all(winning[d] for d in succ):
                        stays = True
                        break
                if not stays:
                    winning[i] = False
                    changed = True
    else:  # F and U grow from the target
        gate = [True] * n if obj.op == "F" else [bool(x) for x in m1]
        changed = True
        while changed:
            rounds += 1
            _check_deadline(deadline, "upper fixpoint")
            changed = False
            for i in range(n):
                if winning[i] or not gate[i]:
                    continue
                for chi in joint_choices(i):
                    succ = successors(i, chi)
                    if succ and all(winning[d] for d in succ):
                        winning[i] = True
                        changed = True
                        break

    starts = coalition_neighborhood(model, coal, model.initial)
    result = all(winning[s] for s in starts)
    return VerifyResult(
        formula=shown, coalition=list(coal), method="fixpoint_upper",
        result=result, strategy=None,
        stats={"rounds": rounds, "winning_states": sum(winning)},
        wall_time=time.monotonic() - t0)


def _closure_fn(model, coal, mode):
    """union: one-step union of the members' observation classes.
    ck: classes of the transitive closure of that relation (these partition
    the states, which is what makes multi-member extraction safe)."""
    if mode == "union":
        cache = {}

        def closure(i):
            if i not in cache:
                cache[i] = coalition_neighborhood(model, coal, i)
            return cache[i]

        return closure
    if mode == "ck":
        n = model.n_states()
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        amas = model.amas
        for name in coal:
            ai = amas.agent_index(name)
            for states in model.partitions[ai].values():
                for other in states[1:]:
                    ra, rb = find(states[0]), find(other)
                    if ra != rb:
                        parent[rb] = ra
        classes = {}
        for i in range(n):
            classes.setdefault(find(i), []).append(i)

        def closure(i):
            return classes[find(i)]

        return closure
    raise ValueError("closure must be 'union' or 'ck', got %r" % (mode,))


def fixpoint_lower(model, formula=None, coalition=None, closure="union",
                   timeout=None):
    """Uniform underapproximation. States join the winning region only when
    one action per (member, local) works from everywhere in the closure of
    their neighborhood; chosen actions are committed and never revised. The
    extracted strategy is re-checked before a `true` is returned, so the
    answer stays sound even where neighborhood certificates interact (see
    `closure='ck'` for the variant whose certificates cannot interact)."""
    t0 = time.monotonic()
    deadline = _deadline(timeout)
    obj, coal, shown = _resolve(model, formula, coalition)
    amas = model.amas
    members = [amas.agent_index(name) for name in coal]
    n = model.n_states()
    adj = _adjacency(model)
    m1, m2 = _objective_masks(model, obj)
    closure_of = _closure_fn(model, coal, closure)
    starts = coalition_neighborhood(model, coal, model.initial)

    commit = {}  # (agent_idx, local_idx) -> action name or ε

    def candidate_choices(i):
        """Assignments for the uncommitted slots the members hold at i,
        merged with existing commitments."""
        locs = model.states[i].locals
        slots = []
        domains = []
        for ai in members:
            li = locs[ai]
            slot = (ai, li)
            if slot in commit:
                slots.append(slot)
                domains.append([commit[slot]])
            else:
                acts = amas.agents[ai].avail[li]
                slots.append(slot)
                domains.append(list(acts) if acts else [EPSILON])
        for combo in itertools.product(*domains):
            yield dict(zip(slots, combo))

    def kept_successors(q, cand):
        """Successors of q under candidate + committed choices; slots that
        are neither stay unrestricted (the final re-check catches any
        optimism this introduces)."""
        locs = model.states[q].locals
        out = []
        for a, d in adj[q]:
            owners = amas.owners.get(a, frozenset())
            ok = True
            for ai in members:
                if ai in owners:
                    slot = (ai, locs[ai])
                    want = cand.get(slot, commit.get(slot))
                    if want is not None and want != a:
                        ok = False
                        break
            if ok:
                out.append(d)
        return out

    rounds = 0
    certificates = 0

    def certify(q, in_q, need_gate):
        """First candidate choice whose one-step certificate covers the
        whole closure of q: progress into the region from every state, with
        blocked states allowed only if already winning."""
        nonlocal certificates
        group = closure_of(q)
        for cand in candidate_choices(q):
            certificates += 1
            ok = True
            for q2 in group:
                if in_q[q2]:
                    continue
                if need_gate is not None and not need_gate[q2]:
                    ok = False
                    break
                succ = kept_successors(q2, cand)
                if not succ or not all(in_q[d] for d in succ):
                    ok = False
                    break
            if ok:
                return cand, group
        return None, group

    if obj.op in ("F", "U"):
        in_q = [bool(x) for x in (m1 if obj.op == "F" else m2)]
        gate = None if obj.op == "F" else [bool(x) for x in m1]
        changed = True
        while changed:
            rounds += 1
            _check_deadline(deadline, "lower fixpoint")
            changed = False
            for q in range(n):
                if in_q[q]:
                    continue
                if gate is not None and not gate[q]:
                    continue
                cand, group = certify(q, in_q, gate)
                if cand is None:
                    continue
                commit.update(cand)
                for q2 in group:
                    in_q[q2] = True
                changed = True
        region_ok = all(in_q[s] for s in starts)
    elif obj.op == "G":
        in_q = [bool(x) for x in m1]
        changed = True
        while changed:
            rounds += 1
            _check_deadline(deadline, "lower fixpoint")
            changed = False
            for q in range(n):
                if not in_q[q]:
                    continue
                group = closure_of(q)
                found = None
                for cand in candidate_choices(q):
                    certificates += 1
                    ok = True
                    for q2 in group:
                        if not in_q[q2]:
                            continue
                        # blocked states stutter inside the invariant
                        if not all(in_q[d] for d in kept_successors(q2, cand)):
                            ok = False
                            break
                    if ok:
                        found = cand
                        break
                if found is None:
                    in_q[q] = False
                    changed = True
                else:
                    commit.update(found)
        region_ok = all(in_q[s] for s in starts)
    else:  # X
        target = [bool(x) for x in m1]
        region_ok = True
        for q in starts:
            _check_deadline(deadline, "lower fixpoint")
            group = closure_of(q)
            found = None
            for cand in candidate_choices(q):
                certificates += 1
                ok = True
                for q2 in group:
                    succ = kept_successors(q2, cand)
                    if not (all(target[d] for d in succ) if succ else target[q2]):
                        ok = False
                        break
                if ok:
                    found = cand
                    break
            if found is None:
                region_ok = False
                break
            commit.update(found)
        in_q = target

    strategy = None
    verified = False
    if region_ok:
        strategy = {}
        for name in coal:
            ai = amas.agent_index(name)
            agent = amas.agents[ai]
            per_local = {}
            for li, local in enumerate(agent.locals):
                chosen = commit.get((ai, li))
                if chosen is None:
                    acts = agent.avail[li]
                    chosen = acts[0] if acts else EPSILON
                per_local[local] = chosen
            strategy[name] = per_local
        pruned = prune_model(model, coal, strategy)
        verified = eval_objective(model, pruned, starts, obj)
        if not verified:
            strategy = None

    result = bool(region_ok and verified)
    return VerifyResult(
        formula=shown, coalition=list(coal), method="fixpoint_lower",
        result=result, strategy=strategy,
        stats={"closure": closure, "rounds": rounds,
               "certificates": certificates,
               "certified_states": sum(1 for x in in_q if x),
               "commits": len(commit),
               "extraction_verified": verified},
        wall_time=time.monotonic() - t0)


def verify_approx(model, formula=None, coalition=None, closure="union",
                  timeout=None):
    """Sandwich the exact answer between the two fixpoints. Polynomial;
    answers true, false, or inconclusive."""
    t0 = time.monotonic()
    deadline = _deadline(timeout)
    obj, coal, shown = _resolve(model, formula, coalition)
    remaining = None if deadline is None else max(deadline - time.monotonic(), 0.0)
    lower = fixpoint_lower(model, obj, coal, closure=closure, timeout=remaining)
    if lower.result is True:
        return VerifyResult(
            formula=shown, coalition=list(coal), method="approx",
            result=True, strategy=lower.strategy,
            stats={"decided_by": "lower", "lower": lower.stats, "upper": None},
            wall_time=time.monotonic() - t0)
    remaining = None if deadline is None else max(deadline - time.monotonic(), 0.0)
    upper = fixpoint_upper(model, obj, coal, timeout=remaining)
    if upper.result is False:
        return VerifyResult(
            formula=shown, coalition=list(coal), method="approx",
            result=False, strategy=None,
            stats={"decided_by": "upper", "lower": lower.stats,
                   "upper": upper.stats},
            wall_time=time.monotonic() - t0)
    return VerifyResult(
        formula=shown, coalition=list(coal), method="approx",
        result="inconclusive", strategy=None,
        stats={"decided_by": "none", "lower": lower.stats,
               "upper": upper.stats},
        wall_time=time.monotonic() - t0)


# ---------------------------------------------------------------------------
# partial-strategy search

def verify_dfs(model, formula=None, coalition=None, timeout=None,
               strategy_limit=DEFAULT_STRATEGY_LIMIT):
    """Depth-first search over partial strategies. A partial assignment
    already determines part of the submodel; when that fragment refutes the
    objective the whole subtree is skipped, and the assignments the
    refutation actually consulted are memoized as a core that prunes other
    branches. Verdicts match `verify_bruteforce`."""
    t0 = time.monotonic()
    deadline = _deadline(timeout)
    obj, coal, shown = _resolve(model, formula, coalition)
    amas = model.amas
    members = [amas.agent_index(name) for name in coal]
    member_set = set(members)
    n = model.n_states()
    adj = _adjacency(model)
    m1, m2 = _objective_masks(model, obj)
    starts = coalition_neighborhood(model, coal, model.initial)

    slots, domains = _slots(model, coal)
    total = 1
    for d in domains:
        total *= len(d)
        if total > strategy_limit:
            raise StrategySpaceExceeded(
                "strategy space exceeds %d" % strategy_limit)
    domain_by_slot = {slot: [
        EPSILON if aid == _EPS_ID else model.action_names[aid]
        for aid in domains[k]] for k, slot in enumerate(slots)}

    p1 = [bool(x) for x in m1]
    p2 = [bool(x) for x in m2] if m2 is not None else None

    if obj.op == "G":
        visit = [True] * n
        expand = [True] * n
        bad_state = [not x for x in p1]
        blocked_is_bad = [False] * n
        cycle_zone = [False] * n
    elif obj.op == "F":
        visit = [not x for x in p1]
        expand = visit
        bad_state = [False] * n
        blocked_is_bad = visit
        cycle_zone = visit
    elif obj.op == "U":
        visit = [not x for x in p2]
        expand = [a and b for a, b in zip(p1, visit)]
        bad_state = [v and not g for v, g in zip(visit, p1)]
        blocked_is_bad = expand
        cycle_zone = expand
    else:  # X handled by a dedicated scan below
        visit = expand = bad_state = blocked_is_bad = cycle_zone = None

    stats = {"nodes": 0, "refutations": 0, "memo_hits": 0}
    cores = []

    def edge_status(q, a, assign, consulted):
        """kept / blocked / first unassigned slot. Consulted assignments are
        recorded so refutations generalize to a core."""
        owners = amas.owners.get(a, frozenset())
        locs = model.states[q].locals
        unassigned = None
        for ai in members:
            if ai not in owners:
                continue
            slot = (ai, locs[ai])
            want = assign.get(slot)
            if want is None:
                if unassigned is None:
                    unassigned = slot
            else:
                consulted[slot] = want
                if want != a:
                    return "blocked", None
        if unassigned is not None:
            return "open", unassigned
        return "kept", None

    def scan_x(assign):
        consulted = {}
        open_slots = []
        for s in starts:
            kept_dsts = []
            undecided = False
            blocked_all = True
            for a, d in adj[s]:
                status, slot = edge_status(s, a, assign, consulted)
                if status == "kept":
                    blocked_all = False
                    kept_dsts.append(d)
                elif status == "open":
                    blocked_all = False
                    undecided = True
                    open_slots.append(slot)
            for d in kept_dsts:
                if not p1[d]:
                    return "refuted", consulted, None
            if blocked_all and not undecided and not p1[s]:
                return "refuted", consulted, None
        if open_slots:
            return "open", consulted, open_slots[0]
        return "won", consulted, None

    def scan(assign):
        """Explore the fragment the assignment determines. Returns
        ("refuted", consulted) / ("open", consulted, slot) / ("won",)."""
        if obj.op == "X":
            return scan_x(assign)
        consulted = {}
        region = []
        in_region = [False] * n
        kept_out = [[] for _ in range(n)]
        open_slots = []
        queue = []
        for s in starts:
            if visit[s] and not in_region[s]:
                in_region[s] = True
                queue.append(s)
        qi = 0
        while qi < len(queue):
            q = queue[qi]
            qi += 1
            region.append(q)
            if bad_state[q]:
                return "refuted", consulted, None
            if not expand[q]:
                continue
            any_kept = False
            any_open = False
            for a, d in adj[q]:
                status, slot = edge_status(q, a, assign, consulted)
                if status == "kept":
                    any_kept = True
                    kept_out[q].append(d)
                    if visit[d] and not in_region[d]:
                        in_region[d] = True
                        queue.append(d)
                elif status == "open":
                    any_open = True
                    open_slots.append(slot)
            if blocked_is_bad[q] and not any_kept and not any_open:
                return "refuted", consulted, None
        # determined cycle inside the gated zone refutes F/U outright
        if obj.op in ("F", "U"):
            zone = {q for q in region if cycle_zone[q]}
            color = dict.fromkeys(zone, 0)
            for root in region:
                if root not in zone or color[root] != 0:
                    continue
                stack = [(root, iter([d for d in kept_out[root] if d in zone]))]
                color[root] = 1
                while stack:
                    node, it = stack[-1]
                    advanced = False
                    for d in it:
                        if color[d] == 1:
                            return "refuted", consulted, None
                        if color[d] == 0:
                            color[d] = 1
                            stack.append(
                                (d, iter([x for x in kept_out[d] if x in zone])))
                            advanced = True
                            break
                    if not advanced:
                        color[node] = 2
                        stack.pop()
        if open_slots:
            return "open", consulted, open_slots[0]
        return "won", consulted, None

    def memo_hit(assign):
        for core in cores:
            ok = True
            for slot, want in core.items():
                if assign.get(slot) != want:
                    ok = False
                    break
            if ok:
                return core
        return None

    assign = {}
    winner = {}

    def search():
        """Returns a refutation core (dict) on failure, None on success."""
        _check_deadline(deadline, "dfs verification")
        stats["nodes"] += 1
        hit = memo_hit(assign)
        if hit is not None:
            stats["memo_hits"] += 1
            return dict(hit)
        status, consulted, slot = scan(assign)
        if status == "refuted":
            stats["refutations"] += 1
            cores.append(dict(consulted))
            return dict(consulted)
        if status == "won":
            winner.update(assign)
            return None
        node_core = {}
        for value in domain_by_slot[slot]:
            assign[slot] = value
            child_core = search()
            del assign[slot]
            if child_core is None:
                return None
            if child_core.get(slot) != value:
                # refutation did not use this branch: it stands on its own
                return child_core
            child_core.pop(slot)
            node_core.update(child_core)
        cores.append(dict(node_core))
        return node_core

    failure = search()
    if failure is None:
        strategy = {}
        for name in coal:
            ai = amas.agent_index(name)
            agent = amas.agents[ai]
            per_local = {}
            for li, local in enumerate(agent.locals):
                chosen = winner.get((ai, li))
                if chosen is None:
                    acts = agent.avail[li]
                    chosen = acts[0] if acts else EPSILON
                per_local[local] = chosen
            strategy[name] = per_local
        result, out_strategy = True, strategy
    else:
        result, out_strategy = False, None
    stats["strategy_space"] = total
    return VerifyResult(
        formula=shown, coalition=list(coal), method="dfs",
        result=result, strategy=out_strategy,
        stats=stats, wall_time=time.monotonic() - t0)
