"""Deterministic fuzz corpus for the preservation and agreement suites.

Each instance is a pure function of its index: the emitter draws from a
seeded generator and the first draw that fits the size budget wins.
Instances are emitted as spec text so every run exercises the parser
too. Budgets keep brute force affordable: at most 3 agents with 4
locals each, at most 3 propositions, formulas use 1-2 of them under an
F or G objective, and oversized strategy spaces or state graphs are
redrawn.
"""

import random

from stratcheck.errors import StratcheckError
from stratcheck.model import build_global_model
from stratcheck.spec_lang import parse_spec, validate

CORPUS_SIZE = 220
MAX_STATES = 400
MAX_STRATEGY_SPACE = 5000

_SHARED_ACTIONS = ["syn0", "syn1", "syn2", "syn3"]
_TWO_PROP_SHAPES = [
    "%s & %s", "%s | %s", "!(%s & %s)", "!(%s | %s)", "%s & !%s", "!%s | %s",
]


def _emit(rng):
    n_agents = rng.randint(1, 3)
    n_props = rng.randint(1, 3)
    props = ["p%d" % i for i in range(n_props)]
    persistent = None
    if n_props and rng.random() < 0.15:
        persistent = rng.choice(props)

    lines = []
    agent_names = ["Ag%d" % k for k in range(n_agents)]
    for k, name in enumerate(agent_names):
        n_locals = rng.randint(1, 4)
        locals_ = ["q%d" % i for i in range(n_locals)]
        lines.append("AGENT %s:" % name)
        lines.append("  INIT: %s" % locals_[0])
        used = set()  # (src, action) pairs must be unique per agent

        def pick_action(effect_prob):
            if rng.random() < 0.35:
                act = rng.choice(_SHARED_ACTIONS)
            else:
                act = "m%d_%d" % (k, rng.randint(0, 4))
            effect = ""
            if rng.random() < effect_prob:
                prop = rng.choice(props)
                value = "true" if prop == persistent else rng.choice(
                    ["true", "false"])
                effect = " SET %s=%s" % (prop, value)
            return act, effect

        # a cycle backbone keeps the agent mobile; extras add branching
        for i, src in enumerate(locals_):
            dst = locals_[(i + 1) % n_locals]
            act, effect = pick_action(0.4)
            if (src, act) in used:
                continue
            used.add((src, act))
            lines.append("  %s -> %s : %s%s" % (src, dst, act, effect))
        for _ in range(rng.randint(0, 4)):
            src = rng.choice(locals_)
            dst = rng.choice(locals_)
            act, effect = pick_action(0.6)
            if (src, act) in used:
                continue
            used.add((src, act))
            lines.append("  %s -> %s : %s%s" % (src, dst, act, effect))

    lines.append("PROPOSITIONS: " + ", ".join(props))
    if persistent:
        lines.append("PERSISTENT: " + persistent)

    size = 2 if n_agents > 1 and rng.random() < 0.2 else 1
    coalition = sorted(rng.sample(agent_names, size))
    if rng.random() < 0.5:
        lines.append("COALITION: " + ", ".join(coalition))

    chosen = rng.sample(props, min(len(props), rng.randint(1, 2)))
    if len(chosen) == 1:
        expr = rng.choice(["%s", "!%s"]) % chosen[0]
    else:
        expr = rng.choice(_TWO_PROP_SHAPES) % tuple(chosen)
    objective = rng.choice(["F", "G"])
    lines.append("FORMULA: <<%s>> %s %s"
                 % (",".join(coalition), objective, expr))
    return "\n".join(lines) + "\n"


def _strategy_space(amas):
    space = 1
    members = {a.name for a in amas.agents} & set(amas.coalition)
    for agent in amas.agents:
        if agent.name not in members:
            continue
        for acts in agent.avail:
            space *= max(1, len(set(acts)))
    return space


def instance(index):
    """Return (text, amas, model) for corpus slot `index`."""
    for attempt in range(50):
        rng = random.Random((index << 20) ^ (attempt << 4) ^ 0x5EED)
        text = _emit(rng)
        try:
            amas = validate(parse_spec(text))
            model = build_global_model(amas, state_limit=MAX_STATES + 1)
        except StratcheckError:
            continue
        if model.n_states() > MAX_STATES:
            continue
        if _strategy_space(amas) > MAX_STRATEGY_SPACE:
            continue
        return text, amas, model
    raise AssertionError("no viable fuzz instance for index %d" % index)
