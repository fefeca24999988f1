"""Explicit global model of an asynchronous multi-agent system.

A global state is the tuple of agent local states plus a boolean store over
the declared propositions (all false initially; only transition effects write
them). A shared action fires when every owner can take it and moves all
owners at once; the interleaving of the rest is left to the scheduler.
States are numbered in breadth-first discovery order with actions tried in
declaration order, so two builds of the same system are identical. A state
with no enabled action carries exactly one stutter self-loop so every path
is infinite.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NotEnabled, StateLimitExceeded

EPSILON = "ε"

DEFAULT_STATE_LIMIT = 10 ** 6


@dataclass(frozen=True)
class GlobalState:
    locals: tuple  # local-state index per agent, declaration order
    store: tuple  # bool per proposition, declaration order


def initial_state(amas):
    return GlobalState(
        locals=tuple(a.init for a in amas.agents),
        store=tuple(False for _ in amas.propositions),
    )


def enabled_global_actions(amas, state):
    """Actions enabled at `state`, in declaration order; [ε] on deadlock."""
    enabled = []
    for act in amas.actions:
        ok = True
        for agent_idx in amas.owners[act]:
            if (state.locals[agent_idx], act) not in amas.agents[agent_idx].step:
                ok = False
                break
        if ok:
            enabled.append(act)
    return enabled if enabled else [EPSILON]


def apply_action(amas, state, action):
    """Successor of `state` under `action`; raises NotEnabled otherwise."""
    if action == EPSILON:
        if enabled_global_actions(amas, state) != [EPSILON]:
            raise NotEnabled("stutter is only enabled in deadlock states")
        return state
    new_locals = list(state.locals)
    new_store = list(state.store)
    prop_index = {p: i for i, p in enumerate(amas.propositions)}
    owners = amas.owners.get(action)
    if owners is None:
        raise NotEnabled("unknown action %r" % action)
    for agent_idx in sorted(owners):
        agent = amas.agents[agent_idx]
        key = (state.locals[agent_idx], action)
        if key not in agent.step:
            raise NotEnabled("action %r is not enabled for agent %r" % (action, agent.name))
        dst, effects = agent.step[key]
        new_locals[agent_idx] = dst
        for prop, value in effects:
            new_store[prop_index[prop]] = value
    return GlobalState(tuple(new_locals), tuple(new_store))


@dataclass
class GlobalModel:
    amas: object
    states: list  # GlobalState, BFS order
    edges: list  # (src_idx, action_name, dst_idx)
    initial: int = 0
    index: dict = field(default_factory=dict, repr=False)

    # filled by _finalize
    action_names: list = field(default_factory=list, repr=False)
    edge_src: np.ndarray = None
    edge_dst: np.ndarray = None
    edge_act: np.ndarray = None
    locals_mat: np.ndarray = None
    props_mat: np.ndarray = None
    partitions: list = field(default_factory=list, repr=False)

    # highlight flags written by reduction runs
    state_reduced: list = field(default_factory=list, repr=False)
    edge_reduced: list = field(default_factory=list, repr=False)

    def n_states(self):
        return len(self.states)

    def n_edges(self):
        return len(self.edges)

    def locals_names(self, idx):
        st = self.states[idx]
        return tuple(self.amas.agents[i].locals[li] for i, li in enumerate(st.locals))

    def true_props(self, idx):
        st = self.states[idx]
        return [p for p, v in zip(self.amas.propositions, st.store) if v]

    def state_label(self, idx):
        return ",".join(self.locals_names(idx))

    def states_with_locals(self, names):
        """All state indices whose local tuple renders as `names`."""
        keys = []
        for i, agent in enumerate(self.amas.agents):
            keys.append(agent.locals.index(names[i]))
        want = tuple(keys)
        return [i for i, st in enumerate(self.states) if st.locals == want]

    def action_id(self, name):
        return self.action_names.index(name)

    def clear_highlight(self):
        self.state_reduced = [False] * len(self.states)
        self.edge_reduced = [False] * len(self.edges)

    def _finalize(self):
        self.action_names = list(self.amas.actions) + [EPSILON]
        act_id = {a: i for i, a in enumerate(self.action_names)}
        n, m = len(self.states), len(self.edges)
        self.edge_src = np.fromiter((e[0] for e in self.edges), dtype=np.int64, count=m)
        self.edge_act = np.fromiter((act_id[e[1]] for e in self.edges), dtype=np.int64, count=m)
        self.edge_dst = np.fromiter((e[2] for e in self.edges), dtype=np.int64, count=m)
        n_agents = len(self.amas.agents)
        self.locals_mat = np.empty((n, n_agents), dtype=np.int64)
        for i, st in enumerate(self.states):
            self.locals_mat[i, :] = st.locals
        n_props = len(self.amas.propositions)
        self.props_mat = np.zeros((n, n_props), dtype=bool)
        for i, st in enumerate(self.states):
            for j, v in enumerate(st.store):
                self.props_mat[i, j] = v
        self.partitions = []
        for ai in range(n_agents):
            part = {}
            for i, st in enumerate(self.states):
                part.setdefault(st.locals[ai], []).append(i)
            self.partitions.append(part)
        self.clear_highlight()


def build_global_model(amas, state_limit=DEFAULT_STATE_LIMIT):
    """Breadth-first product construction from the initial state."""
    init = initial_state(amas)
    states = [init]
    index = {init: 0}
    edges = []
    frontier = [0]
    while frontier:
        next_frontier = []
        for src in frontier:
            state = states[src]
            for act in enabled_global_actions(amas, state):
                succ = apply_action(amas, state, act)
                dst = index.get(succ)
                if dst is None:
                    if len(states) >= state_limit:
                        raise StateLimitExceeded(
                            "global model exceeds %d states" % state_limit)
                    dst = len(states)
                    index[succ] = dst
                    states.append(succ)
                    next_frontier.append(dst)
                edges.append((src, act, dst))
        frontier = next_frontier
    model = GlobalModel(amas=amas, states=states, edges=edges, index=index)
    model._finalize()
    return model


def epistemic_class(model, agent_name, state_idx):
    """Indices of states the agent cannot tell apart from `state_idx`."""
    ai = model.amas.agent_index(agent_name)
    return list(model.partitions[ai][model.states[state_idx].locals[ai]])


def coalition_neighborhood(model, coalition, state_idx):
    """One-step union of the members' epistemic classes (not transitive)."""
    seen = set()
    for member in coalition:
        seen.update(epistemic_class(model, member, state_idx))
    return sorted(seen)


# ---------------------------------------------------------------------------
# exports

def _gvquote(text):
    # names are bare identifiers, so only the quote needs care; the \n
    # line-break marker in labels must pass through unescaped
    return '"%s"' % text.replace('"', '\\"')


def export_graph(model, fmt="dot", highlight_reduced=False):
    """Render the model as DOT or JSON; highlights follow reduction flags."""
    if fmt == "dot":
        return _export_dot(model, highlight_reduced)
    if fmt == "json":
        return json.dumps(graph_payload(model, highlight_reduced),
                          ensure_ascii=False, separators=(",", ":"))
    raise ValueError("unknown export format %r" % fmt)


def _export_dot(model, highlight):
    lines = ["digraph M {"]
    for i in range(len(model.states)):
        label = model.state_label(i)
        props = model.true_props(i)
        if props:
            label += "\\n" + ",".join(props)
        attrs = "label=%s" % _gvquote(label)
        if highlight and model.state_reduced[i]:
            attrs += ", color=blue"
        lines.append("  %d [%s];" % (i, attrs))
    for k, (src, act, dst) in enumerate(model.edges):
        attrs = "label=%s" % _gvquote(act)
        if highlight and model.edge_reduced[k]:
            attrs += ", color=blue"
        lines.append("  %d -> %d [%s];" % (src, dst, attrs))
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_payload(model, highlight_reduced=False):
    states = []
    for i in range(len(model.states)):
        states.append({
            "id": i,
            "locals": list(model.locals_names(i)),
            "props": model.true_props(i),
            "reduced": bool(model.state_reduced[i]) if highlight_reduced else False,
        })
    edges = []
    for k, (src, act, dst) in enumerate(model.edges):
        edges.append({
            "src": src,
            "dst": dst,
            "action": act,
            "reduced": bool(model.edge_reduced[k]) if highlight_reduced else False,
        })
    return {
        "agents": [a.name for a in model.amas.agents],
        "states": states,
        "edges": edges,
        "initial": model.initial,
    }


def import_graph_json(text):
    """Read a JSON export back into comparable state/edge multisets."""
    data = json.loads(text)
    states = sorted(
        (tuple(s["locals"]), tuple(sorted(s["props"]))) for s in data["states"])
    by_id = {s["id"]: (tuple(s["locals"]), tuple(sorted(s["props"]))) for s in data["states"]}
    edges = sorted(
        (by_id[e["src"]], e["action"], by_id[e["dst"]]) for e in data["edges"])
    return {"agents": data["agents"], "states": states, "edges": edges,
            "initial": by_id[data["initial"]]}
