"""Partial-order reduction of the global model.

Instead of expanding every enabled action everywhere, a state may expand
only the locally available actions of one agent when that cannot change
what the rest of the run can observe. An agent qualifies at a state when

- it is not a coalition member (their choice points must survive intact),
- its current local state has at least one outgoing transition,
- every such action is private to it (no other agent helps execute it),
- none of them writes a visible or persistent proposition, and
- none of them writes a proposition some other agent also writes.

Cycles need one fully expanded state each, or invisible progress could be
postponed forever. Two provisos are offered: `safe` re-expands whenever an
ample-only state closes a cycle on the search stack; `aggressive` skips the
re-expansion when the stack segment around the cycle already contains a
fully expanded state. `safe` is the default and the conservative choice.
"""

from dataclasses import dataclass, field

from .model import (
    DEFAULT_STATE_LIMIT,
    GlobalModel,
    enabled_global_actions,
    apply_action,
    initial_state,
)
from .errors import StateLimitExceeded
from .spec_lang import props_of


@dataclass(frozen=True)
class ReductionParams:
    coalition: tuple
    visible: frozenset
    c3: str = "safe"


def default_params(amas, c3="safe"):
    """Coalition and visible set taken from the document's formula."""
    visible = set(props_of(amas.formula.arg1))
    if amas.formula.arg2 is not None:
        visible |= props_of(amas.formula.arg2)
    return ReductionParams(
        coalition=tuple(amas.coalition),
        visible=frozenset(visible) | amas.persistent,
        c3=c3,
    )


def _action_writes(amas):
    writes = {a: set() for a in amas.actions}
    agent_writes = []
    for agent in amas.agents:
        mine = set()
        for (_, act), (_, effects) in agent.step.items():
            for prop, _ in effects:
                writes[act].add(prop)
                mine.add(prop)
        agent_writes.append(mine)
    return writes, agent_writes


def invisible(amas, action, visible):
    """No write to a visible or persistent proposition."""
    writes, _ = _action_writes(amas)
    shielded = frozenset(visible) | amas.persistent
    return not (writes.get(action, set()) & shielded)


@dataclass
class _Frame:
    state: int
    actions: list
    pos: int = 0
    emitted: set = field(default_factory=set)
    fully: bool = False


@dataclass
class ReductionResult:
    model: GlobalModel  # states in DFS discovery order
    params: ReductionParams
    fully_expanded: list  # per reduced state

    def stats(self):
        n = self.model.n_states()
        full_count = sum(1 for x in self.fully_expanded if x)
        return {"states": n, "edges": self.model.n_edges(),
                "fully_expanded": full_count, "ample": n - full_count,
                "mode": self.params.c3}


def build_reduced_model(amas, params=None, state_limit=DEFAULT_STATE_LIMIT):
    """Depth-first product construction taking ample steps where allowed."""
    if params is None:
        params = default_params(amas)
    if params.c3 not in ("safe", "aggressive"):
        raise ValueError("c3 must be 'safe' or 'aggressive', got %r" % (params.c3,))

    shielded = frozenset(params.visible) | amas.persistent
    member_idx = {amas.agent_index(name) for name in params.coalition}
    writes, agent_writes = _action_writes(amas)
    foreign_writes = []
    for ai in range(len(amas.agents)):
        other = set()
        for k, mine in enumerate(agent_writes):
            if k != ai:
                other |= mine
        foreign_writes.append(other)

    def ample_actions(state):
        """First agent (declaration order) whose locally available actions
        all qualify; returns its action list or None."""
        for ai, agent in enumerate(amas.agents):
            if ai in member_idx:
                continue
            acts = agent.avail[state.locals[ai]]
            if not acts:
                continue
            ok = True
            for act in acts:
                if amas.owners[act] != frozenset((ai,)):
                    ok = False
                    break
                if writes[act] & shielded:
                    ok = False
                    break
                if writes[act] & foreign_writes[ai]:
                    ok = False
                    break
            if ok:
                return list(acts)
        return None

    init = initial_state(amas)
    states = [init]
    index = {init: 0}
    edges = []
    fully_expanded = [False]
    on_stack = {}

    def make_frame(idx):
        state = states[idx]
        ample = ample_actions(state)
        if ample is None:
            fully_expanded[idx] = True
            return _Frame(state=idx, actions=enabled_global_actions(amas, state),
                          fully=True)
        return _Frame(state=idx, actions=ample)

    frames = [make_frame(0)]
    on_stack[0] = 0

    while frames:
        fr = frames[-1]
        if fr.pos >= len(fr.actions):
            del on_stack[fr.state]
            frames.pop()
            continue
        act = fr.actions[fr.pos]
        fr.pos += 1
        if act in fr.emitted:
            continue
        fr.emitted.add(act)
        succ = apply_action(amas, states[fr.state], act)
        dst = index.get(succ)
        if dst is None:
            if len(states) >= state_limit:
                raise StateLimitExceeded(
                    "reduced model exceeds %d states" % state_limit)
            dst = len(states)
            index[succ] = dst
            states.append(succ)
            fully_expanded.append(False)
            edges.append((fr.state, act, dst))
            frames.append(make_frame(dst))
            on_stack[dst] = len(frames) - 1
            continue
        edges.append((fr.state, act, dst))
        if dst in on_stack and not fr.fully:
            segment = frames[on_stack[dst]:]
            if params.c3 == "safe" or not any(f.fully for f in segment):
                # the ample step closed a cycle with no fully expanded
                # state on it: widen this state to everything enabled
                fr.actions = enabled_global_actions(amas, states[fr.state])
                fr.pos = 0
                fr.fully = True
                fully_expanded[fr.state] = True

    model = GlobalModel(amas=amas, states=states, edges=edges, index=index)
    model._finalize()
    return ReductionResult(model=model, params=params,
                           fully_expanded=fully_expanded)


def mark_reduction(full_model, reduced_model):
    """Write presence-in-reduction flags onto the full model for exports."""
    full_model.clear_highlight()
    kept_edges = set()
    for s, a, d in reduced_model.edges:
        fs = full_model.index[reduced_model.states[s]]
        fd = full_model.index[reduced_model.states[d]]
        kept_edges.add((fs, a, fd))
    for st in reduced_model.states:
        i = full_model.index.get(st)
        if i is not None:
            full_model.state_reduced[i] = True
    for k, edge in enumerate(full_model.edges):
        full_model.edge_reduced[k] = edge in kept_edges
