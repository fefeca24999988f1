"""Model description language: parsing, pretty-printing, validation.

A model file is line-oriented UTF-8 with `%` comments:

    AGENT Controller:
      INIT: G
      G -> R : a1
      R -> G : a2 SET done=true
    PROPOSITIONS: done
    PERSISTENT: done
    COALITION: Controller
    FORMULA: <<Controller>> F done

Agents own the actions their transitions mention; an action mentioned by
several agents is shared and fires only when every owner can take it.
Local-state names are introduced by first mention (INIT first, then
transition endpoints in order). Boolean operators in formulas bind
`!` > `&` > `|`. `validate` turns a parsed document into the immutable
system description the model builder consumes.
"""

from dataclasses import dataclass, field

from .errors import (
    ArityMismatch,
    DuplicateDeclaration,
    EmptyAgent,
    NestedModality,
    PersistentClearedError,
    SpecSyntaxError,
    UnknownLocalState,
    UnknownReference,
)

# Section keywords are reserved everywhere; the temporal words only as
# proposition names (locals, agents and actions may legally be called G).
KEYWORDS = {"AGENT", "INIT", "PROPOSITIONS", "PERSISTENT", "COALITION", "FORMULA", "SET"}
RESERVED_PROPS = {"true", "false", "X", "F", "G", "U"}


# ---------------------------------------------------------------------------
# tokens

_SINGLE = {
    "(": "LPAREN",
    ")": "RPAREN",
    ":": "COLON",
    ",": "COMMA",
    "=": "EQ",
    "!": "BANG",
    "&": "AMP",
    "|": "PIPE",
    "~": "TILDE",
}


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def _scan(text, line_no):
    """Tokenize one comment-stripped line."""
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t":
            i += 1
            continue
        col = i + 1
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("ID", text[i:j], line_no, col))
            i = j
        elif text.startswith("->", i):
            toks.append(Token("ARROW", "->", line_no, col))
            i += 2
        elif text.startswith("<<", i):
            toks.append(Token("DLANGLE", "<<", line_no, col))
            i += 2
        elif text.startswith(">>", i):
            toks.append(Token("DRANGLE", ">>", line_no, col))
            i += 2
        elif c in _SINGLE:
            toks.append(Token(_SINGLE[c], c, line_no, col))
            i += 1
        else:
            raise SpecSyntaxError("unexpected character %r" % c, line_no, col)
    return toks


class _Cursor:
    """Token stream with positioned error reporting."""

    def __init__(self, toks, line_no, end_col):
        self.toks = toks
        self.pos = 0
        self.line = line_no
        self.end_col = end_col

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, kind, what=None):
        tok = self.peek()
        if tok is None or tok.kind != kind:
            want = what or kind.lower()
            got = repr(tok.text) if tok else "end of line"
            line = tok.line if tok else self.line
            col = tok.col if tok else self.end_col
            raise SpecSyntaxError("expected %s, got %s" % (want, got), line, col)
        self.pos += 1
        return tok

    def accept(self, kind, text=None):
        tok = self.peek()
        if tok is not None and tok.kind == kind and (text is None or tok.text == text):
            self.pos += 1
            return tok
        return None

    def ident(self, what="name"):
        tok = self.take("ID", what)
        if tok.text in KEYWORDS:
            raise SpecSyntaxError("reserved word %r used as %s" % (tok.text, what), tok.line, tok.col)
        return tok

    def done(self):
        tok = self.peek()
        if tok is not None:
            raise SpecSyntaxError("unexpected %r" % tok.text, tok.line, tok.col)


# ---------------------------------------------------------------------------
# syntax trees

@dataclass(frozen=True)
class Lit:
    value: bool


@dataclass(frozen=True)
class Prop:
    name: str


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class FormulaAst:
    """One coalition modality over a temporal objective.

    op is "X", "F", "G" or "U"; arg2 is the right operand of U, else None.
    """

    coalition: tuple
    op: str
    arg1: object
    arg2: object = None


@dataclass
class Transition:
    src: str
    dst: str
    action: str
    effects: tuple  # of (prop_name, bool)


@dataclass
class AgentDecl:
    name: str
    init: str = None
    locals: list = field(default_factory=list)
    transitions: list = field(default_factory=list)


@dataclass
class SpecDocument:
    agents: list
    propositions: list
    persistent: list
    coalition: tuple  # None means: default to the formula's coalition
    formula: FormulaAst
    spans: dict = field(compare=False, default_factory=dict)

    def agent_names(self):
        return [a.name for a in self.agents]

    def effective_coalition(self):
        return self.coalition if self.coalition is not None else self.formula.coalition


@dataclass
class RelationSpec:
    """Candidate relation between two documents, as local-state descriptors."""

    pairs: list  # of (left_tuple, right_tuple)
    coalition: tuple  # left-model agent names


# ---------------------------------------------------------------------------
# formula parsing

def _parse_bool(cur):
    return _parse_or(cur)


def _parse_or(cur):
    node = _parse_and(cur)
    while cur.accept("PIPE"):
        node = Or(node, _parse_and(cur))
    return node


def _parse_and(cur):
    node = _parse_not(cur)
    while cur.accept("AMP"):
        node = And(node, _parse_not(cur))
    return node


def _parse_not(cur):
    if cur.accept("BANG"):
        return Not(_parse_not(cur))
    return _parse_atom(cur)


def _parse_atom(cur):
    tok = cur.peek()
    if tok is None:
        raise SpecSyntaxError("expected proposition or '('", cur.line, cur.end_col)
    if tok.kind == "DLANGLE":
        raise NestedModality("coalition modality nested inside a formula", tok.line, tok.col)
    if tok.kind == "LPAREN":
        cur.take("LPAREN")
        node = _parse_or(cur)
        cur.take("RPAREN", "')'")
        return node
    if tok.kind == "ID":
        cur.pos += 1
        if tok.text == "true":
            return Lit(True)
        if tok.text == "false":
            return Lit(False)
        if tok.text in KEYWORDS or tok.text in ("X", "F", "G", "U"):
            raise SpecSyntaxError("reserved word %r used as proposition" % tok.text, tok.line, tok.col)
        return Prop(tok.text)
    raise SpecSyntaxError("expected proposition or '(', got %r" % tok.text, tok.line, tok.col)


def _parse_formula_tokens(cur):
    cur.take("DLANGLE", "'<<'")
    members = [cur.ident("agent name").text]
    while cur.accept("COMMA"):
        members.append(cur.ident("agent name").text)
    cur.take("DRANGLE", "'>>'")
    tok = cur.peek()
    if tok is None:
        raise SpecSyntaxError("expected temporal objective", cur.line, cur.end_col)
    if tok.kind == "ID" and tok.text in ("X", "F", "G"):
        cur.pos += 1
        arg = _parse_bool(cur)
        cur.done()
        return FormulaAst(tuple(members), tok.text, arg)
    left = _parse_bool(cur)
    utok = cur.peek()
    if utok is None or utok.kind != "ID" or utok.text != "U":
        line = utok.line if utok else cur.line
        col = utok.col if utok else cur.end_col
        raise SpecSyntaxError("expected 'U'", line, col)
    cur.pos += 1
    right = _parse_bool(cur)
    cur.done()
    return FormulaAst(tuple(members), "U", left, right)


def parse_formula(text, line_no=1):
    """Parse a standalone formula like `<<Controller>> G !(in1 & in2)`."""
    toks = _scan(_strip_comment(text), line_no)
    if not toks:
        raise SpecSyntaxError("expected '<<'", line_no, 1)
    cur = _Cursor(toks, line_no, len(text) + 1)
    return _parse_formula_tokens(cur)


def props_of(expr, acc=None):
    """Collect proposition names used in a boolean expression or formula."""
    if acc is None:
        acc = []
    if isinstance(expr, FormulaAst):
        props_of(expr.arg1, acc)
        if expr.arg2 is not None:
            props_of(expr.arg2, acc)
    elif isinstance(expr, Prop):
        if expr.name not in acc:
            acc.append(expr.name)
    elif isinstance(expr, Not):
        props_of(expr.arg, acc)
    elif isinstance(expr, (And, Or)):
        props_of(expr.left, acc)
        props_of(expr.right, acc)
    return acc


# ---------------------------------------------------------------------------
# document parsing

def _strip_comment(line):
    cut = line.find("%")
    if cut >= 0:
        line = line[:cut]
    return line.rstrip("\n").rstrip()


def parse_spec(text):
    """Parse a model file into a SpecDocument."""
    agents = []
    by_name = {}
    propositions = []
    persistent = []
    coalition = None
    formula = None
    spans = {}
    sections_seen = set()
    current = None  # AgentDecl being filled

    def note_local(agent, name):
        if name not in agent.locals:
            agent.locals.append(name)

    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = _strip_comment(raw)
        if not stripped.strip():
            continue
        toks = _scan(stripped, line_no)
        cur = _Cursor(toks, line_no, len(stripped) + 1)
        head = toks[0]

        if head.kind == "ID" and head.text == "AGENT":
            cur.pos += 1
            name_tok = cur.ident("agent name")
            cur.take("COLON", "':'")
            cur.done()
            if name_tok.text in by_name:
                raise DuplicateDeclaration("agent %r declared twice" % name_tok.text, line_no, name_tok.col)
            current = AgentDecl(name_tok.text)
            by_name[name_tok.text] = current
            agents.append(current)
            spans[("agent", name_tok.text)] = (line_no, head.col)
            continue

        if head.kind == "ID" and head.text == "INIT":
            if current is None:
                raise SpecSyntaxError("INIT outside an AGENT block", line_no, head.col)
            cur.pos += 1
            cur.take("COLON", "':'")
            loc = cur.ident("local state")
            cur.done()
            if current.init is not None:
                raise DuplicateDeclaration("INIT declared twice for agent %r" % current.name, line_no, head.col)
            if current.transitions:
                raise SpecSyntaxError("INIT must precede transitions", line_no, head.col)
            current.init = loc.text
            note_local(current, loc.text)
            spans[("init", current.name)] = (line_no, head.col)
            continue

        if head.kind == "ID" and head.text in ("PROPOSITIONS", "PERSISTENT", "COALITION", "FORMULA"):
            current = None
            if head.text in sections_seen:
                raise DuplicateDeclaration("section %s declared twice" % head.text, line_no, head.col)
            sections_seen.add(head.text)
            cur.pos += 1
            cur.take("COLON", "':'")
            if head.text == "PROPOSITIONS":
                names = [cur.ident("proposition").text]
                while cur.accept("COMMA"):
                    names.append(cur.ident("proposition").text)
                cur.done()
                for nm in names:
                    if nm in RESERVED_PROPS:
                        raise SpecSyntaxError("reserved word %r used as proposition" % nm, line_no, head.col)
                    if nm in propositions:
                        raise DuplicateDeclaration("proposition %r declared twice" % nm, line_no, head.col)
                    propositions.append(nm)
                    spans[("prop", nm)] = (line_no, head.col)
            elif head.text == "PERSISTENT":
                names = [cur.ident("proposition").text]
                while cur.accept("COMMA"):
                    names.append(cur.ident("proposition").text)
                cur.done()
                for nm in names:
                    if nm in persistent:
                        raise DuplicateDeclaration("persistent proposition %r listed twice" % nm, line_no, head.col)
                    persistent.append(nm)
                spans[("persistent",)] = (line_no, head.col)
            elif head.text == "COALITION":
                members = [cur.ident("agent name").text]
                while cur.accept("COMMA"):
                    members.append(cur.ident("agent name").text)
                cur.done()
                coalition = tuple(members)
                spans[("coalition",)] = (line_no, head.col)
            else:  # FORMULA
                formula = _parse_formula_tokens(cur)
                spans[("formula",)] = (line_no, head.col)
            continue

        # anything else must be a transition line inside an agent block
        if current is None:
            raise SpecSyntaxError("expected AGENT or a section, got %r" % head.text, line_no, head.col)
        src = cur.ident("local state")
        cur.take("ARROW", "'->'")
        dst = cur.ident("local state")
        cur.take("COLON", "':'")
        act = cur.ident("action")
        effects = []
        if cur.accept("ID", "SET"):
            while True:
                p = cur.ident("proposition")
                cur.take("EQ", "'='")
                v = cur.take("ID", "true or false")
                if v.text not in ("true", "false"):
                    raise SpecSyntaxError("expected true or false, got %r" % v.text, v.line, v.col)
                if any(p.text == q for q, _ in effects):
                    raise DuplicateDeclaration("proposition %r set twice in one effect" % p.text, p.line, p.col)
                effects.append((p.text, v.text == "true"))
                if not cur.accept("COMMA"):
                    break
        cur.done()
        if current.init is None:
            raise SpecSyntaxError("INIT must precede transitions", line_no, head.col)
        if any(t.src == src.text and t.action == act.text for t in current.transitions):
            raise DuplicateDeclaration(
                "transition from %r on %r declared twice" % (src.text, act.text), line_no, head.col)
        note_local(current, src.text)
        note_local(current, dst.text)
        tr = Transition(src.text, dst.text, act.text, tuple(effects))
        spans[("transition", current.name, len(current.transitions))] = (line_no, head.col)
        current.transitions.append(tr)

    if not agents:
        raise SpecSyntaxError("expected AGENT", 1, 1)
    if formula is None:
        raise SpecSyntaxError("expected FORMULA section", 1, 1)

    doc = SpecDocument(agents, propositions, persistent, coalition, formula, spans)
    _check_references(doc)
    return doc


def _check_references(doc):
    names = set(doc.agent_names())
    declared = set(doc.propositions)
    for p in doc.persistent:
        if p not in declared:
            raise UnknownReference("persistent proposition %r is not declared" % p,
                                   *doc.spans.get(("persistent",), (None, None)))
    for agent in doc.agents:
        for i, tr in enumerate(agent.transitions):
            for p, _ in tr.effects:
                if p not in declared:
                    raise UnknownReference("proposition %r is not declared" % p,
                                           *doc.spans.get(("transition", agent.name, i), (None, None)))
    fl, fc = doc.spans.get(("formula",), (None, None))
    for member in doc.formula.coalition:
        if member not in names:
            raise UnknownReference("coalition member %r is not a declared agent" % member, fl, fc)
    for p in props_of(doc.formula):
        if p not in declared:
            raise UnknownReference("proposition %r is not declared" % p, fl, fc)
    if doc.coalition is not None:
        cl, cc = doc.spans.get(("coalition",), (None, None))
        for member in doc.coalition:
            if member not in names:
                raise UnknownReference("coalition member %r is not a declared agent" % member, cl, cc)


# ---------------------------------------------------------------------------
# pretty-printing (canonical form; reparsing yields an equal document)

def pretty_bool(expr):
    return _pp_or(expr)


def _pp_or(e):
    if isinstance(e, Or):
        return "%s | %s" % (_pp_or(e.left), _pp_and(e.right))
    return _pp_and(e)


def _pp_and(e):
    if isinstance(e, Or):
        return "(%s)" % _pp_or(e)
    if isinstance(e, And):
        return "%s & %s" % (_pp_and(e.left), _pp_not(e.right))
    return _pp_not(e)


def _pp_not(e):
    if isinstance(e, (Or, And)):
        return "(%s)" % _pp_or(e)
    if isinstance(e, Not):
        return "!%s" % _pp_not(e.arg)
    if isinstance(e, Lit):
        return "true" if e.value else "false"
    if isinstance(e, Prop):
        return e.name
    raise TypeError("not a boolean expression: %r" % (e,))


def pretty_formula(f):
    coal = ",".join(f.coalition)
    if f.op == "U":
        return "<<%s>> %s U %s" % (coal, pretty_bool(f.arg1), pretty_bool(f.arg2))
    return "<<%s>> %s %s" % (coal, f.op, pretty_bool(f.arg1))


def pretty(doc):
    """Render a document back to canonical text."""
    out = []
    for agent in doc.agents:
        out.append("AGENT %s:" % agent.name)
        if agent.init is not None:
            out.append("  INIT: %s" % agent.init)
        for tr in agent.transitions:
            line = "  %s -> %s : %s" % (tr.src, tr.dst, tr.action)
            if tr.effects:
                line += " SET " + ", ".join(
                    "%s=%s" % (p, "true" if v else "false") for p, v in tr.effects)
            out.append(line)
    if doc.propositions:
        out.append("PROPOSITIONS: " + ", ".join(doc.propositions))
    if doc.persistent:
        out.append("PERSISTENT: " + ", ".join(doc.persistent))
    if doc.coalition is not None:
        out.append("COALITION: " + ", ".join(doc.coalition))
    out.append("FORMULA: " + pretty_formula(doc.formula))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# validation

@dataclass
class AgentSem:
    """Validated agent: locals indexed by declaration order."""

    name: str
    locals: tuple
    init: int
    # avail[local_idx] = action names on outgoing transitions, declaration order
    avail: tuple
    # step[(local_idx, action)] = (dst_idx, ((prop_name, bool), ...))
    step: dict


@dataclass
class AMAS:
    """Validated multi-agent system; treat as immutable."""

    agents: tuple
    actions: tuple  # first-mention order across the document
    owners: dict  # action -> frozenset of agent indices
    propositions: tuple
    persistent: frozenset
    coalition: tuple
    formula: FormulaAst

    def agent_index(self, name):
        for i, a in enumerate(self.agents):
            if a.name == name:
                return i
        raise UnknownReference("agent %r is not declared" % name)


def validate(doc):
    """Check document-level rules and build the immutable system value."""
    for agent in doc.agents:
        if not agent.locals:
            raise EmptyAgent("agent %r has no local states" % agent.name,
                             *doc.spans.get(("agent", agent.name), (None, None)))

    persistent = frozenset(doc.persistent)
    for agent in doc.agents:
        for i, tr in enumerate(agent.transitions):
            for p, v in tr.effects:
                if p in persistent and not v:
                    raise PersistentClearedError(
                        "persistent proposition %r assigned false" % p,
                        *doc.spans.get(("transition", agent.name, i), (None, None)))

    actions = []
    owners = {}
    for idx, agent in enumerate(doc.agents):
        for tr in agent.transitions:
            if tr.action not in owners:
                owners[tr.action] = set()
                actions.append(tr.action)
            owners[tr.action].add(idx)
    owners = {a: frozenset(s) for a, s in owners.items()}

    sem_agents = []
    for agent in doc.agents:
        index = {nm: i for i, nm in enumerate(agent.locals)}
        avail = [[] for _ in agent.locals]
        step = {}
        for tr in agent.transitions:
            s, d = index[tr.src], index[tr.dst]
            avail[s].append(tr.action)
            step[(s, tr.action)] = (d, tr.effects)
        sem_agents.append(AgentSem(
            name=agent.name,
            locals=tuple(agent.locals),
            init=index[agent.init],
            avail=tuple(tuple(acts) for acts in avail),
            step=step,
        ))

    return AMAS(
        agents=tuple(sem_agents),
        actions=tuple(actions),
        owners=owners,
        propositions=tuple(doc.propositions),
        persistent=persistent,
        coalition=tuple(doc.effective_coalition()),
        formula=doc.formula,
    )


# ---------------------------------------------------------------------------
# relation files

def _doc_agents(model_like):
    """Accept a SpecDocument or an AMAS and return (names, locals lists)."""
    if isinstance(model_like, AMAS):
        return [a.name for a in model_like.agents], [list(a.locals) for a in model_like.agents]
    return model_like.agent_names(), [list(a.locals) for a in model_like.agents]


def parse_relation(text, left, right, coalition=None):
    """Parse `(l1,..,ln) ~ (r1,..,rm)` lines against two models.

    The relation file carries only pairs; the coalition comes from the caller
    and defaults to the left model's coalition.
    """
    lnames, llocals = _doc_agents(left)
    rnames, rlocals = _doc_agents(right)

    def read_tuple(cur, locals_per_agent, side, line_no):
        open_tok = cur.take("LPAREN", "'('")
        names = [cur.ident("local state")]
        while cur.accept("COMMA"):
            names.append(cur.ident("local state"))
        cur.take("RPAREN", "')'")
        if len(names) != len(locals_per_agent):
            raise ArityMismatch(
                "%s descriptor has %d components, model has %d agents"
                % (side, len(names), len(locals_per_agent)), line_no, open_tok.col)
        out = []
        for i, tok in enumerate(names):
            if tok.text not in locals_per_agent[i]:
                raise UnknownLocalState(
                    "agent %d has no local state %r" % (i, tok.text), tok.line, tok.col)
            out.append(tok.text)
        return tuple(out)

    pairs = []
    seen = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = _strip_comment(raw)
        if not stripped.strip():
            continue
        toks = _scan(stripped, line_no)
        cur = _Cursor(toks, line_no, len(stripped) + 1)
        lt = read_tuple(cur, llocals, "left", line_no)
        cur.take("TILDE", "'~'")
        rt = read_tuple(cur, rlocals, "right", line_no)
        cur.done()
        if (lt, rt) not in seen:
            seen.add((lt, rt))
            pairs.append((lt, rt))

    if coalition is None:
        if isinstance(left, AMAS):
            coalition = left.coalition
        else:
            coalition = left.effective_coalition()
    for member in coalition:
        if member not in lnames:
            raise UnknownReference("coalition member %r is not a declared agent" % member)
    return RelationSpec(pairs=pairs, coalition=tuple(coalition))
