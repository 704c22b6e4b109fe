"""Network-of-agents model structure, validation, and JSON (de)serialization.

A model is a finite set of agents, each with disjoint local state sets and an
initial state, plus synchronization actions.  An action names the agents it
involves (``loc``), the joint local states at which it is enabled, and one
probability distribution over joint outcomes per enabled joint state.  The
determinacy discipline -- every local state is compatible with exactly one
action -- is what makes the global behaviour a Markov chain; it is checked by
:func:`validate`, never assumed.

Probabilities are stored exactly as :class:`fractions.Fraction` so that the
measure-theoretic cross checks can run in exact arithmetic; the simulation
layers convert to floats once, up front.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, ModelFormatError

ProbLike = int | float | str | Fraction

#: A joint state of all agents: index ``i - 1`` holds agent ``i``'s local state.
GlobalState = tuple[str, ...]


def as_fraction(value: ProbLike) -> Fraction:
    """Convert a probability literal to an exact fraction.

    Strings accept both ``"p/q"`` and decimal forms.  Floats are interpreted
    through their shortest decimal representation (so ``0.1`` means 1/10, not
    the binary float), which matches how model files are written by hand.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ModelFormatError(f"probability may not be a boolean: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelFormatError(f"cannot parse probability {value!r}") from exc
    raise ModelFormatError(f"cannot parse probability {value!r}")


def format_prob(p: Fraction) -> str:
    """Canonical text form used when serializing models: ``"1"``, ``"3/4"``, ..."""
    if p.denominator == 1:
        return str(p.numerator)
    return f"{p.numerator}/{p.denominator}"


@dataclass(frozen=True)
class Agent:
    """One component of the network. ``id`` is the 1-based agent index."""

    id: int
    name: str
    states: tuple[str, ...]
    initial: str


@dataclass(frozen=True)
class UState:
    """A joint state of a nonempty subset of agents.

    ``agents`` is sorted ascending and ``states[k]`` is the local state of
    ``agents[k]``.  Global states are the special case where ``agents`` is
    ``(1, ..., n)``; the hot paths elsewhere use bare tuples for those and
    convert at API boundaries.
    """

    agents: tuple[int, ...]
    states: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.agents:
            raise DomainError("a joint state needs a nonempty agent set")
        if len(self.agents) != len(self.states):
            raise DomainError("agents and states have different lengths")
        if tuple(sorted(self.agents)) != self.agents:
            raise DomainError("agents must be sorted ascending")

    def __getitem__(self, agent: int) -> str:
        try:
            return self.states[self.agents.index(agent)]
        except ValueError:
            raise DomainError(f"agent {agent} not in domain {self.agents}") from None

    @property
    def domain(self) -> tuple[int, ...]:
        return self.agents


def project(state: UState, w: Iterable[int]) -> UState:
    """Restrict a joint state to the agent subset ``w``.

    ``w`` must be a nonempty subset of the state's domain; projecting to the
    full domain is the identity.
    """
    ws = tuple(sorted(set(w)))
    if not ws:
        raise DomainError("cannot project to an empty agent set")
    missing = [i for i in ws if i not in state.agents]
    if missing:
        raise DomainError(f"agents {missing} outside domain {state.agents}")
    if ws == state.agents:
        return state
    return UState(ws, tuple(state[i] for i in ws))


# A distribution row: outcome joint states (aligned with the action's loc)
# paired with their exact probabilities, in declaration order.
Row = tuple[tuple[tuple[str, ...], Fraction], ...]


@dataclass
class Action:
    """A synchronization among the agents in ``loc``.

    ``rows`` maps each enabled joint state of ``loc`` (a tuple aligned with
    the sorted ``loc``) to its outcome distribution.  The enabled set is
    exactly ``rows.keys()``.
    """

    name: str
    loc: tuple[int, ...]
    rows: dict[tuple[str, ...], Row]

    def __post_init__(self) -> None:
        self.loc = tuple(self.loc)
        if tuple(sorted(self.loc)) != self.loc:
            raise ModelFormatError(
                f"action {self.name!r}: loc must be sorted ascending (rows align with it)")

    @property
    def enabled(self) -> Iterable[tuple[str, ...]]:
        return self.rows.keys()


def make_row(dist: Mapping[Sequence[str], ProbLike] | Iterable[tuple[Sequence[str], ProbLike]]) -> Row:
    """Build a distribution row from (outcome tuple, probability) pairs."""
    items = dist.items() if isinstance(dist, Mapping) else dist
    return tuple((tuple(target), as_fraction(p)) for target, p in items)


@dataclass
class DmcModel:
    """A validated-or-validatable network of probabilistic agents.

    Instances are treated as immutable after construction; all derived lookup
    tables are built once here.  Use :func:`validate` before trusting a model
    that did not come from one of the shipped builders.
    """

    agents: tuple[Agent, ...]
    actions: tuple[Action, ...]
    valuations: dict[str, frozenset[str]] = field(default_factory=dict)
    name: str = "model"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.agents = tuple(self.agents)
        self.actions = tuple(self.actions)
        self.n = len(self.agents)
        if self.n == 0:
            raise ModelFormatError("a model needs at least one agent")
        ids = [a.id for a in self.agents]
        if ids != list(range(1, self.n + 1)):
            raise ModelFormatError(f"agent ids must be 1..{self.n} in order, got {ids}")
        self.agent_by_name = {a.name: a for a in self.agents}
        if len(self.agent_by_name) != self.n:
            raise ModelFormatError("agent names must be unique")

        self.owner: dict[str, int] = {}
        for a in self.agents:
            for s in a.states:
                if s in self.owner:
                    raise ModelFormatError(f"local state name {s!r} is not globally unique")
                self.owner[s] = a.id

        self.action_by_name = {act.name: act for act in self.actions}
        if len(self.action_by_name) != len(self.actions):
            raise ModelFormatError("action names must be unique")

        self.initial_state: GlobalState = tuple(a.initial for a in self.agents)

        # act(s): actions that mention local state s in some enabled joint state.
        self._act: dict[str, list[Action]] = {s: [] for s in self.owner}
        for act in self.actions:
            seen: set[str] = set()
            for src in act.rows:
                for s in src:
                    if s not in seen and s in self._act:
                        self._act[s].append(act)
                        seen.add(s)

    # -- basic queries ----------------------------------------------------

    def agent(self, agent_id: int) -> Agent:
        if not 1 <= agent_id <= self.n:
            raise DomainError(f"agent id {agent_id} out of range 1..{self.n}")
        return self.agents[agent_id - 1]

    def act(self, agent_id: int, state: str) -> set[Action]:
        """The actions compatible with a local state (a singleton in a valid model)."""
        ag = self.agent(agent_id)
        if state not in ag.states:
            raise DomainError(f"state {state!r} does not belong to agent {ag.name!r}")
        return set(self._act[state])

    def atomic_props(self, state: str) -> frozenset[str]:
        """Atomic propositions of a local state: declared ones plus its own name."""
        return self.valuations.get(state, frozenset()) | {state}

    def agent_props(self, agent_id: int) -> frozenset[str]:
        ag = self.agent(agent_id)
        props = set(ag.states)
        for s in ag.states:
            props |= self.valuations.get(s, frozenset())
        return frozenset(props)

    def global_ustate(self, s: GlobalState) -> UState:
        return UState(tuple(range(1, self.n + 1)), tuple(s))

    def state_of(self, s: GlobalState, agents: Sequence[int]) -> tuple[str, ...]:
        """Projection of a global state tuple onto sorted agent ids."""
        return tuple(s[i - 1] for i in agents)


# -- validation -----------------------------------------------------------


@dataclass
class Violation:
    kind: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.subject}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(model: DmcModel, *, exact: bool = False, tol: float = 1e-9,
             idle_states_fatal: bool = True) -> ValidationReport:
    """Check every model invariant; an empty ``violations`` list means valid.

    ``exact`` demands distribution sums equal 1 exactly instead of within
    ``tol``.  Local states never mentioned by any action are errors by
    default (the determinacy rule demands exactly one compatible action);
    ``idle_states_fatal=False`` downgrades them to warnings for models with
    intentionally terminal-looking states.
    """
    rep = ValidationReport()
    err = rep.violations.append
    warn = rep.warnings.append

    for ag in model.agents:
        if len(set(ag.states)) != len(ag.states):
            err(Violation("duplicate-state", ag.name, "agent lists a state twice"))
        if ag.initial not in ag.states:
            err(Violation("initial-state", ag.name,
                          f"initial state {ag.initial!r} not among the agent's states"))

    for act in model.actions:
        subj = f"action {act.name!r}"
        if not act.loc:
            err(Violation("empty-loc", subj, "loc must be nonempty"))
            continue
        bad_ids = [i for i in act.loc if not 1 <= i <= model.n]
        if bad_ids:
            err(Violation("unknown-agent", subj, f"loc contains unknown agents {bad_ids}"))
            continue
        if not act.rows:
            warn(Violation("never-enabled", subj, "enabled set is empty; action can never fire"))
        for src, row in act.rows.items():
            rsubj = f"{subj}, enabled state {src}"
            if len(src) != len(act.loc):
                err(Violation("arity", rsubj, f"joint state has arity {len(src)}, loc has {len(act.loc)}"))
                continue
            for agent_id, s in zip(act.loc, src):
                if model.owner.get(s) != agent_id:
                    err(Violation("wrong-owner", rsubj,
                                  f"state {s!r} does not belong to agent {agent_id}"))
            seen_targets: set[tuple[str, ...]] = set()
            total = Fraction(0)
            for target, p in row:
                if len(target) != len(act.loc):
                    err(Violation("arity", rsubj, f"outcome {target} has wrong arity"))
                    continue
                for agent_id, s in zip(act.loc, target):
                    if model.owner.get(s) != agent_id:
                        err(Violation("wrong-owner", rsubj,
                                      f"outcome state {s!r} does not belong to agent {agent_id}"))
                if target in seen_targets:
                    err(Violation("duplicate-target", rsubj, f"outcome {target} listed twice"))
                seen_targets.add(target)
                if p < 0 or p > 1:
                    err(Violation("prob-range", rsubj, f"probability {p} outside [0, 1]"))
                total += p
            if exact:
                if total != 1:
                    err(Violation("distribution-sum", rsubj, f"probabilities sum to {total}, not 1"))
            elif abs(float(total) - 1.0) > tol:
                err(Violation("distribution-sum", rsubj,
                              f"probabilities sum to {float(total)}, not 1 (tol {tol})"))

    # Determinacy: each local state compatible with exactly one action.
    for ag in model.agents:
        for s in ag.states:
            acts = model._act[s]
            if len(acts) > 1:
                names = sorted(a.name for a in acts)
                err(Violation("determinacy", f"(agent {ag.name!r}, state {s!r})",
                              f"state is compatible with {len(acts)} actions: {names}"))
            elif not acts:
                v = Violation("idle-state", f"(agent {ag.name!r}, state {s!r})",
                              "no action ever mentions this state in an enabling joint state")
                (err if idle_states_fatal else warn)(v)

    # Atomic proposition sets of distinct agents must be disjoint
    # (state names are automatically propositions of their agent).
    claimed: dict[str, int] = {}
    for ag in model.agents:
        for ap in sorted(model.agent_props(ag.id)):
            prev = claimed.get(ap)
            if prev is not None and prev != ag.id:
                err(Violation("ap-clash", f"proposition {ap!r}",
                              f"appears for both agent {prev} and agent {ag.id}"))
            claimed[ap] = ag.id

    return rep


# -- JSON model format ----------------------------------------------------
#
# {
#   "name": "...",                        optional
#   "agents": [{"name", "states", "initial"}, ...],
#   "actions": [{"name", "loc": [agent names],
#                "enabled": [{"from": [...], "to": [[[target...], "p/q"], ...]}, ...]}, ...],
#   "valuations": {"state": ["ap", ...], ...},   optional
#   "metadata": {...}                             optional
# }


def model_to_dict(model: DmcModel) -> dict:
    """Plain-data form of a model, with canonical ordering and probability text."""
    doc: dict = {
        "name": model.name,
        "agents": [
            {"name": a.name, "states": list(a.states), "initial": a.initial}
            for a in model.agents
        ],
        "actions": [
            {
                "name": act.name,
                "loc": [model.agents[i - 1].name for i in act.loc],
                "enabled": [
                    {
                        "from": list(src),
                        "to": [[list(t), format_prob(p)] for t, p in row],
                    }
                    for src, row in sorted(act.rows.items())
                ],
            }
            for act in model.actions
        ],
        "valuations": {
            s: sorted(aps) for s, aps in sorted(model.valuations.items()) if aps
        },
    }
    if model.metadata:
        doc["metadata"] = model.metadata
    return doc


def model_to_json(model: DmcModel) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def model_from_dict(doc: dict) -> DmcModel:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    for key in ("agents", "actions"):
        if key not in doc:
            raise ModelFormatError(f"model document lacks the {key!r} section")

    agents = []
    for idx, entry in enumerate(doc["agents"], start=1):
        try:
            agents.append(Agent(idx, entry["name"], tuple(entry["states"]), entry["initial"]))
        except (KeyError, TypeError) as exc:
            raise ModelFormatError(f"agent #{idx} is malformed: {exc}") from exc
    id_of = {a.name: a.id for a in agents}
    if len(id_of) != len(agents):
        raise ModelFormatError("agent names must be unique")

    actions = []
    for entry in doc["actions"]:
        try:
            name = entry["name"]
            loc_names = entry["loc"]
            enabled = entry["enabled"]
        except (KeyError, TypeError) as exc:
            raise ModelFormatError(f"action entry is malformed: {exc}") from exc
        try:
            loc = tuple(sorted(id_of[nm] for nm in loc_names))
        except KeyError as exc:
            raise ModelFormatError(f"action {name!r} names unknown agent {exc}") from exc
        order = sorted(range(len(loc_names)), key=lambda k: id_of[loc_names[k]])
        rows: dict[tuple[str, ...], Row] = {}
        for rowdoc in enabled:
            try:
                src_raw = rowdoc["from"]
                to = rowdoc["to"]
            except (KeyError, TypeError) as exc:
                raise ModelFormatError(f"action {name!r} has a malformed row: {exc}") from exc
            if len(src_raw) != len(loc):
                raise ModelFormatError(
                    f"action {name!r}: 'from' arity {len(src_raw)} != loc arity {len(loc)}")
            src = tuple(src_raw[k] for k in order)
            row = []
            for item in to:
                if not (isinstance(item, (list, tuple)) and len(item) == 2):
                    raise ModelFormatError(f"action {name!r}: malformed outcome entry {item!r}")
                target_raw, p = item
                if len(target_raw) != len(loc):
                    raise ModelFormatError(
                        f"action {name!r}: outcome arity {len(target_raw)} != loc arity {len(loc)}")
                target = tuple(target_raw[k] for k in order)
                row.append((target, as_fraction(p)))
            if src in rows:
                raise ModelFormatError(f"action {name!r}: enabled state {src} listed twice")
            rows[src] = tuple(row)
        actions.append(Action(name, loc, rows))

    valuations = {
        s: frozenset(aps) for s, aps in (doc.get("valuations") or {}).items()
    }
    return DmcModel(
        agents=tuple(agents),
        actions=tuple(actions),
        valuations=valuations,
        name=doc.get("name", "model"),
        metadata=doc.get("metadata", {}) or {},
    )


def model_from_json(text: str) -> DmcModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid JSON: {exc}") from exc
    return model_from_dict(doc)


def load_model(path: str) -> DmcModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(fh.read())


def save_model(model: DmcModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(model))
