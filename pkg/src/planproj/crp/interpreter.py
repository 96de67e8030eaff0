"""Stepwise interpreter for concurrent reactive plans.

The interpreter advances a tree of threads to quiescence per step.  A
step is driven by one event: a wakeup, a fluent change, or a primitive
completion.  Between steps every thread is blocked (on a fluent network,
a running primitive, a valve, or its children) or done.

Threads are generators; document order (the thread's path in the plan
tree) decides who advances first, which makes stepping deterministic:
identical event sequences yield identical observable states.  Killing a
branch (try-in-parallel winner, policy teardown, valve scope exit)
closes its generators, so cleanup handlers release valves, unregister
pending networks, and abort in-flight primitives.

Blocked fluent networks are registered as pending conditions.  A
projector may attach a synthetic boolean input to a pending condition
(see PendingCondition.synthetic_key); the condition is then driven by
scheduled trigger-region crossings instead of re-evaluation.
"""

from __future__ import annotations

import itertools
from bisect import insort
from dataclasses import dataclass, field
from typing import Generator, Iterable

from .. import fluents
from ..fluents import Gate
from . import nodes
from .nodes import Action, Plan


class DeadlockDetected(Exception):
    pass


# -- events -------------------------------------------------------------------

@dataclass(frozen=True)
class Wakeup:
    pass


@dataclass(frozen=True)
class FluentChange:
    fluent_id: str
    value: object


@dataclass(frozen=True)
class PrimitiveDone:
    request_id: int
    ok: bool = True
    payload: object = None


Event = Wakeup | FluentChange | PrimitiveDone


@dataclass
class PrimitiveRequest:
    request_id: int
    action: Action
    thread_path: tuple[int, ...]
    completed: bool = False
    aborted: bool = False
    result: tuple = (True, None)
    nav: object = None  # projector's per-primitive state rides here


@dataclass
class PendingCondition:
    """A fluent network some thread is blocked on (or watching for edges)."""

    uid: int
    net: Gate  # flattened: only primitive fluent inputs remain
    kind: str  # 'level' | 'edge'
    thread_path: tuple[int, ...]
    synthetic_key: str | None = None

    def evaluate(self, store) -> bool:
        if self.synthetic_key is not None:
            return bool(store.get(self.synthetic_key, False))
        return bool(fluents.eval_network(self.net, store))


# -- blocks -------------------------------------------------------------------

@dataclass
class _WaitBlock:
    pc: PendingCondition


@dataclass
class _EdgeBlock:
    pc: PendingCondition
    last: bool = False
    fired: bool = False


@dataclass
class _PrimBlock:
    request_id: int


@dataclass
class _ValveBlock:
    scope: "_ValveScope"


@dataclass
class _JoinBlock:
    threads: list
    mode: str  # 'all' | 'any'


@dataclass
class _ValveScope:
    valve: str
    priority: int
    uid: int
    owned: bool = False
    waiting: bool = False
    interrupt_key: str = ""
    thread: object = None  # None for holders outside the plan tree


@dataclass
class _ValveState:
    owner: _ValveScope | None = None
    waiters: list = field(default_factory=list)  # (-priority, fifo, scope)


@dataclass(frozen=True)
class _Env:
    defs: tuple[tuple[str, Gate], ...] = ()
    scopes: tuple[_ValveScope, ...] = ()

    def defs_map(self) -> dict[str, Gate]:
        return dict(self.defs)

    def with_defs(self, new: Iterable[tuple[str, Gate]]) -> "_Env":
        return _Env(self.defs + tuple(new), self.scopes)

    def with_scope(self, scope: _ValveScope, interrupt_net: Gate) -> "_Env":
        return _Env(self.defs + (("interrupted?", interrupt_net),), self.scopes + (scope,))


class _Thread:
    __slots__ = ("path", "gen", "done", "block", "children", "parent",
                 "on_done", "resume", "spawned")

    def __init__(self, path, gen, parent, on_done=None):
        self.path = path
        self.gen = gen
        self.parent = parent
        self.on_done = on_done
        self.done = False
        self.block = None
        self.children: list[_Thread] = []
        self.resume = None
        self.spawned = 0

    def __lt__(self, other):
        return self.path < other.path


class Interpreter:
    """Interpreter state: thread tree, fluent/variable store, valve table,
    and the registry of pending conditions."""

    def __init__(self, plan: Plan, fluent_values: dict | None = None,
                 measured_fluents: dict[str, str] | None = None):
        self.plan = plan
        self.store: dict[str, object] = dict(fluent_values or {})
        self.measured_fluents = dict(measured_fluents
                                     if measured_fluents is not None
                                     else {"robot-x": "x", "robot-y": "y"})
        self.valves: dict[str, _ValveState] = {}
        self.pending: dict[int, PendingCondition] = {}
        self.pending_added: list[PendingCondition] = []
        self.pending_removed: list[PendingCondition] = []
        self.requests: dict[int, PrimitiveRequest] = {}
        self.new_requests: list[PrimitiveRequest] = []
        self.aborted_requests: list[PrimitiveRequest] = []
        self._threads: list[_Thread] = []
        self._uid = itertools.count(1)
        self._fifo = itertools.count(1)
        self._pulses: list[str] = []
        self._started = False
        root = _Thread((), None, None)
        root.gen = self._run_node(root, plan, _Env())
        self._threads.append(root)
        self._root = root

    # -- public API -----------------------------------------------------------

    @property
    def done(self) -> bool:
        return self._root.done

    def step(self, event: Event) -> list[PrimitiveRequest]:
        """Advance to quiescence under one event; returns primitives started."""
        self.new_requests = []
        self.aborted_requests = []
        self.pending_added = []
        self.pending_removed = []
        if isinstance(event, FluentChange):
            self.set_fluent(event.fluent_id, event.value)
        elif isinstance(event, PrimitiveDone):
            self._complete(event)
        self._run_to_quiescence()
        while self._pulses:
            keys, self._pulses = self._pulses, []
            for key in keys:
                self.set_fluent(key, False)
            self._run_to_quiescence()
        self._check_deadlock()
        return self.new_requests

    def set_fluent(self, fluent_id: str, value) -> None:
        self.store[fluent_id] = value
        self._scan_edges()

    def pending_conditions(self) -> list[Gate]:
        return [pc.net for pc in self.pending.values()]

    def pending_items(self) -> list[PendingCondition]:
        return list(self.pending.values())

    def running_requests(self) -> list[PrimitiveRequest]:
        return [r for r in self.requests.values() if not r.completed and not r.aborted]

    def observable_state(self):
        """A comparable snapshot: store, valve owners, blocked shapes."""
        valves = {name: (v.owner.uid if v.owner else None,
                         tuple(s.uid for _, _, s in sorted(v.waiters)))
                  for name, v in self.valves.items()}
        blocks = tuple((t.path, type(t.block).__name__) for t in self._threads)
        return (dict(self.store), valves, blocks, self.done)

    # -- valve operations (also usable directly) -------------------------------

    def acquire_valve(self, holder_id: str, valve: str, priority: int) -> bool:
        """Request a valve outside any plan scope; True when owned now.

        A queued request is granted later in priority order (FIFO among
        equals); a strictly higher priority preempts the current owner,
        pulsing the owner's interrupt fluent.
        """
        scope = self._external_scope(holder_id, valve, priority)
        self._valve_request(scope)
        return scope.owned

    def release_valve(self, holder_id: str, valve: str) -> None:
        scope = self._external_scope(holder_id, valve, 0)
        self._valve_drop(scope)

    def valve_owner(self, valve: str) -> str | None:
        state = self.valves.get(valve)
        if state and state.owner:
            return state.owner.interrupt_key
        return None

    def _external_scope(self, holder_id: str, valve: str, priority: int) -> _ValveScope:
        key = f"__interrupted/{valve}/{holder_id}"
        for v in self.valves.values():
            for s in [v.owner] + [w[2] for w in v.waiters]:
                if s is not None and s.interrupt_key == key:
                    return s
        scope = _ValveScope(valve, priority, next(self._uid), interrupt_key=key)
        return scope

    # -- stepping internals -----------------------------------------------------

    def _run_to_quiescence(self) -> None:
        if not self._started:
            self._started = True
        while True:
            th = self._first_runnable()
            if th is None:
                return
            self._advance(th)

    def _first_runnable(self) -> _Thread | None:
        for th in sorted(self._threads):
            if th.done:
                continue
            blk = th.block
            if blk is None:
                th.resume = None
                return th
            if isinstance(blk, _WaitBlock):
                if blk.pc.evaluate(self.store):
                    th.resume = None
                    return th
            elif isinstance(blk, _EdgeBlock):
                if blk.fired:
                    blk.fired = False
                    th.resume = None
                    return th
            elif isinstance(blk, _PrimBlock):
                req = self.requests[blk.request_id]
                if req.completed:
                    th.resume = req.result
                    return th
            elif isinstance(blk, _ValveBlock):
                if blk.scope.owned:
                    th.resume = None
                    return th
            elif isinstance(blk, _JoinBlock):
                done = [t.done for t in blk.threads]
                if (all(done) if blk.mode == "all" else any(done)):
                    th.resume = None
                    return th
        return None

    def _advance(self, th: _Thread) -> None:
        try:
            th.block = th.gen.send(th.resume)
        except StopIteration:
            self._finish(th)

    def _finish(self, th: _Thread) -> None:
        th.done = True
        th.block = None
        if th in self._threads:
            self._threads.remove(th)
        # stays in parent.children so joins can observe the done flag
        if th.on_done is not None:
            th.on_done()

    def _spawn(self, parent: _Thread, node: Plan, env: _Env, on_done=None) -> _Thread:
        child = _Thread(parent.path + (parent.spawned,), None, parent, on_done)
        parent.spawned += 1
        child.gen = self._run_node(child, node, env)
        parent.children.append(child)
        insort(self._threads, child)
        return child

    def _kill(self, th: _Thread) -> None:
        for child in list(th.children):
            if not child.done:
                self._kill(child)
        if not th.done:
            th.gen.close()
            th.done = True
            if th in self._threads:
                self._threads.remove(th)

    def _scan_edges(self) -> None:
        for th in self._threads:
            blk = th.block
            if isinstance(blk, _EdgeBlock):
                now = blk.pc.evaluate(self.store)
                if now and not blk.last:
                    blk.fired = True
                blk.last = now

    def _check_deadlock(self) -> None:
        """Raise when no thread can ever progress again.

        Raised only for a provable valve cycle: every live leaf thread is
        blocked on a valve, and each awaited valve is held by a scope whose
        thread is itself stuck in the same way.  Threads blocked on fluent
        networks or running primitives can still be woken from outside, so
        they never count as deadlocked.
        """
        if self.done:
            return
        live = [t for t in self._threads if not t.done]
        if not live:
            return
        leaves = [t for t in live if all(c.done for c in t.children)]
        if not leaves or not all(isinstance(t.block, _ValveBlock) for t in leaves):
            return
        for t in leaves:
            owner = self.valves[t.block.scope.valve].owner
            if owner is None or owner.thread is None:
                return  # free, or held outside the plan tree
        awaited = sorted({t.block.scope.valve for t in leaves})
        raise DeadlockDetected(f"threads mutually blocked on valves {awaited}")

    # -- valves ----------------------------------------------------------------

    def _valve_request(self, scope: _ValveScope) -> None:
        state = self.valves.setdefault(scope.valve, _ValveState())
        if state.owner is None:
            state.owner = scope
            scope.owned = True
            return
        if state.owner is scope:
            return
        if scope.priority > state.owner.priority:
            old = state.owner
            old.owned = False
            state.owner = scope
            scope.owned = True
            self._enqueue_waiter(state, old)
            self._pulse(old.interrupt_key)
            return
        self._enqueue_waiter(state, scope)

    def _enqueue_waiter(self, state: _ValveState, scope: _ValveScope) -> None:
        if not scope.waiting:
            scope.waiting = True
            state.waiters.append((-scope.priority, next(self._fifo), scope))
            state.waiters.sort(key=lambda w: (w[0], w[1]))

    def _valve_drop(self, scope: _ValveScope) -> None:
        state = self.valves.get(scope.valve)
        if state is None:
            return
        state.waiters = [w for w in state.waiters if w[2] is not scope]
        scope.waiting = False
        if state.owner is scope:
            state.owner = None
            scope.owned = False
            if state.waiters:
                _, _, nxt = state.waiters.pop(0)
                nxt.waiting = False
                state.owner = nxt
                nxt.owned = True

    def _pulse(self, key: str) -> None:
        self.set_fluent(key, True)
        self._pulses.append(key)

    # -- primitives --------------------------------------------------------------

    def _issue(self, th: _Thread, action: Action) -> PrimitiveRequest:
        req = PrimitiveRequest(next(self._uid), action, th.path)
        self.requests[req.request_id] = req
        self.new_requests.append(req)
        return req

    def _complete(self, ev: PrimitiveDone) -> None:
        req = self.requests.get(ev.request_id)
        if req is None or req.completed or req.aborted:
            return
        req.completed = True
        req.result = (ev.ok, ev.payload)
        # the interpreter owns execution-state bookkeeping
        if ev.ok and isinstance(req.action, nodes.PickUp):
            self.set_fluent(f"execution-state/{req.action.obj}", "loaded")
        elif ev.ok and isinstance(req.action, nodes.PutDown):
            self.set_fluent(f"execution-state/{req.action.obj}", "delivered")

    # -- pending conditions --------------------------------------------------------

    def _register(self, th: _Thread, net: Gate, env: _Env, kind: str) -> PendingCondition:
        flat = fluents.flatten(net, env.defs_map())
        self._seed_inputs(flat)
        pc = PendingCondition(next(self._uid), flat, kind, th.path)
        self.pending[pc.uid] = pc
        self.pending_added.append(pc)
        return pc

    def _unregister(self, pc: PendingCondition) -> None:
        if self.pending.pop(pc.uid, None) is not None:
            self.pending_removed.append(pc)

    def _seed_inputs(self, net: Gate) -> None:
        for fid in fluents.network_inputs(net):
            if fid in self.store:
                continue
            if fid in self.measured_fluents:
                self.store[fid] = 0.0
            elif fid.startswith("execution-state/"):
                self.store[fid] = "to-be-acquired"
            else:
                self.store[fid] = False

    def _eval_now(self, net: Gate, env: _Env) -> bool:
        flat = fluents.flatten(net, env.defs_map())
        self._seed_inputs(flat)
        return bool(fluents.eval_network(flat, self.store))

    # -- the tree-walking core -------------------------------------------------------

    def _run_node(self, th: _Thread, node: Plan, env: _Env) -> Generator:
        n = nodes
        if isinstance(node, n.Seq):
            for item in node.items:
                yield from self._run_node(th, item, env)
        elif isinstance(node, n.Par):
            kids = [self._spawn(th, item, env) for item in node.items]
            yield _JoinBlock(kids, "all")
        elif isinstance(node, n.TryInParallel):
            kids = [self._spawn(th, item, env) for item in node.items]
            try:
                yield _JoinBlock(kids, "any")
            finally:
                for k in kids:
                    if not k.done:
                        self._kill(k)
        elif isinstance(node, n.Loop):
            while True:
                yield from self._run_node(th, node.body, env)
                if node.until is not None and self._eval_now(node.until, env):
                    break
        elif isinstance(node, n.WaitFor):
            pc = self._register(th, node.condition, env, "level")
            try:
                if not pc.evaluate(self.store):
                    yield _WaitBlock(pc)
            finally:
                self._unregister(pc)
        elif isinstance(node, n.Whenever):
            pc = self._register(th, node.condition, env, "edge")
            state = {"running": False}
            blk = _EdgeBlock(pc, last=pc.evaluate(self.store))
            try:
                while True:
                    yield blk
                    if not state["running"]:
                        state["running"] = True
                        self._spawn(th, node.body, env,
                                    on_done=lambda: state.update(running=False))
            finally:
                self._unregister(pc)
        elif isinstance(node, n.WithPolicy):
            policy = self._spawn(th, node.policy, env)
            body = self._spawn(th, node.body, env)
            try:
                yield _JoinBlock([body], "all")
            finally:
                if not policy.done:
                    self._kill(policy)
                if not body.done:
                    self._kill(body)
        elif isinstance(node, n.WithValve):
            scope = _ValveScope(node.valve, node.priority, next(self._uid), thread=th)
            scope.interrupt_key = f"__interrupted/{node.valve}/{scope.uid}"
            self.store.setdefault(scope.interrupt_key, False)
            env2 = env.with_scope(scope, fluents.Input(scope.interrupt_key))
            self._valve_request(scope)
            try:
                while not scope.owned:
                    yield _ValveBlock(scope)
                yield from self._run_node(th, node.body, env2)
            finally:
                self._valve_drop(scope)
        elif isinstance(node, n.WithLocalFluents):
            defs_map = env.defs_map()
            resolved = tuple((name, fluents.flatten(net, defs_map))
                             for name, net in node.defs)
            yield from self._run_node(th, node.body, env.with_defs(resolved))
        elif isinstance(node, n.Named):
            yield from self._run_node(th, node.body, env)
        elif isinstance(node, n.If):
            if self._eval_now(node.guard, env):
                yield from self._run_node(th, node.then, env)
        elif isinstance(node, n.SetVar):
            self.set_fluent(node.name, node.value)
        elif isinstance(node, n.Primitive):
            # a scope that lost its valve gates the primitives under it
            while True:
                lost = [s for s in env.scopes if not s.owned]
                if not lost:
                    break
                yield _ValveBlock(lost[0])
            req = self._issue(th, node.action)
            try:
                yield _PrimBlock(req.request_id)
            finally:
                if not req.completed:
                    req.aborted = True
                    self.aborted_requests.append(req)
        else:
            raise TypeError(f"not a plan node: {node!r}")


def step_interpreter(state: Interpreter, event: Event) -> tuple[Interpreter, list[PrimitiveRequest]]:
    """Functional facade over Interpreter.step."""
    return state, state.step(event)
