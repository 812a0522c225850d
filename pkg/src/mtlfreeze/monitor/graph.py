"""The incremental monitor: a graph of gate nodes over a live observation.

Nodes exist per (subformula, interval, valuation) for non-atomic subformulas;
atoms appear only as propositions referenced by parent gates.  Data values
flow down (cloning nodes into extended valuations), Boolean truth values flow
up along the edges, and a verdict is emitted when a root node over a singleton
interval becomes Boolean.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Set, Tuple

from ..formula import (
    Cmp,
    Const,
    FormulaTable,
    Freeze,
    Next,
    Not,
    Or,
    Pred,
    Prev,
    Since,
    TrueF,
    Until,
    Var,
    is_atomic,
)
from ..intervals import Interval
from ..observation import Observation, ObservationError
from ..oracle import Oracle, cmp_values
from ..truth import F, T, Truth3, U
from ..valuation import EMPTY, Valuation, v_del, v_get, v_set
from .gates import (
    FreezeGate,
    Gate,
    NextPrevGate,
    NotGate,
    OrGate,
    PassGate,
    PropKey,
    TemporalGate,
)
from .obstate import ObsState

NodeKey = PropKey  # (subformula index, interval, valuation)


def _node_order(key: NodeKey):
    """Deterministic processing order: preorder index, then interval, then
    valuation (data values may mix ints and strings)."""
    sub, interval, nu = key
    return (
        sub,
        interval.sort_key(),
        tuple((name, type(v).__name__, str(v)) for name, v in nu),
    )


@dataclass(frozen=True)
class Verdict:
    ts: Fraction
    value: bool


class MonitorError(RuntimeError):
    pass


class GateGraph:
    def __init__(self, table: FormulaTable, gc: bool = True, debug_checks: bool = False):
        self.table = table
        self.gc_enabled = gc
        self.debug_checks = debug_checks
        self.obs = ObsState()
        self.nodes: Dict[NodeKey, Gate] = {}
        self.node_props: Dict[NodeKey, Set[PropKey]] = {}
        self.node_refs: Dict[NodeKey, Set[Interval]] = {}
        self.out_edges: Dict[PropKey, Set[NodeKey]] = {}
        self.nodes_at: Dict[Interval, Set[NodeKey]] = {}
        self.refs_at: Dict[Interval, Set[NodeKey]] = {}
        self.atom_props_at: Dict[Interval, Set[PropKey]] = {}
        self.emitted: Dict[Fraction, bool] = {}
        self.peak_nodes = 0
        self._batch: List[Verdict] = []
        self._gcq: List[PropKey] = []
        self._is_pred = [isinstance(f, Pred) for f in table.nodes]
        self._is_atom = [is_atomic(f) for f in table.nodes]
        self._init_nodes()

    # ------------------------------------------------------------------ init

    def _init_nodes(self) -> None:
        root_iv = Interval.unbounded()
        if is_atomic(self.table.root):
            key = (0, root_iv, EMPTY)
            self._register_node(key, PassGate(root_iv, EMPTY, 0))
            self._after_update(key)
            self._drain_gc()
            return
        for idx, node in enumerate(self.table.nodes):
            if is_atomic(node):
                continue
            key = (idx, root_iv, EMPTY)
            self._register_node(key, self._build_gate(idx, root_iv))
            self._after_update(key)
        self._drain_gc()

    def _build_gate(self, idx: int, own: Interval) -> Gate:
        f = self.table.nodes[idx]
        if isinstance(f, Not):
            return NotGate(own, EMPTY, self.table.idx(f.body))
        if isinstance(f, Or):
            return OrGate(own, EMPTY, self.table.idx(f.left), self.table.idx(f.right))
        if isinstance(f, Freeze):
            return FreezeGate(own, EMPTY, self.table.idx(f.body))
        if isinstance(f, (Since, Until)):
            fwd = isinstance(f, Until)
            gate = TemporalGate(
                own,
                EMPTY,
                fwd,
                self.table.idx(f.left),
                self.table.idx(f.right),
                f.interval,
                left_const=self._const_truth(f.left),
                right_const=self._const_truth(f.right),
            )
            gate.seed_initial()
            return gate
        if isinstance(f, (Prev, Next)):
            fwd = isinstance(f, Next)
            return NextPrevGate(
                own,
                EMPTY,
                fwd,
                self.table.idx(f.body),
                f.interval,
                body_const=self._const_truth(f.body),
            )
        raise MonitorError(f"no gate shape for {f!r}")

    def _const_truth(self, f) -> Optional[bool]:
        if isinstance(f, TrueF):
            return True
        if isinstance(f, Cmp) and isinstance(f.lhs, Const) and isinstance(f.rhs, Const):
            return cmp_values(f.op, f.lhs.value, f.rhs.value)
        return None

    # ----------------------------------------------------------- registration

    def _register_node(self, key: NodeKey, gate: Gate, fold: bool = True) -> None:
        if fold:
            self._fold_atoms(gate)
        self.nodes[key] = gate
        props = set(gate.child_props(self.obs))
        refs = set(gate.referenced_intervals(self.obs))
        self.node_props[key] = props
        self.node_refs[key] = refs
        self.nodes_at.setdefault(gate.own, set()).add(key)
        for iv in refs:
            self.refs_at.setdefault(iv, set()).add(key)
        is_pred = self._is_pred
        for p in props:
            self.out_edges.setdefault(p, set()).add(key)
            if is_pred[p[0]]:
                self.atom_props_at.setdefault(p[1], set()).add(p)
        if len(self.nodes) > self.peak_nodes:
            self.peak_nodes = len(self.nodes)

    def _unregister_node(self, key: NodeKey) -> None:
        gate = self.nodes.pop(key, None)
        if gate is None:
            return
        bucket = self.nodes_at.get(gate.own)
        if bucket is not None:
            bucket.discard(key)
            if not bucket:
                del self.nodes_at[gate.own]
        for iv in self.node_refs.pop(key, ()):
            bucket = self.refs_at.get(iv)
            if bucket is not None:
                bucket.discard(key)
                if not bucket:
                    del self.refs_at[iv]
        for p in self.node_props.pop(key, ()):
            self._drop_edge(p, key)

    def _drop_edge(self, prop: PropKey, parent: NodeKey) -> None:
        bucket = self.out_edges.get(prop)
        if bucket is None:
            return
        bucket.discard(parent)
        if bucket:
            return
        del self.out_edges[prop]
        if self._is_pred[prop[0]]:
            ap = self.atom_props_at.get(prop[1])
            if ap is not None:
                ap.discard(prop)
                if not ap:
                    del self.atom_props_at[prop[1]]
        elif not self._is_atom[prop[0]]:
            self._gcq.append(prop)

    def _sync_node(self, key: NodeKey) -> None:
        """Re-derive a gate's prop/interval references after a mutation.

        Only props appearing for the first time can have become decidable, so
        atom folding is restricted to them."""
        gate = self.nodes.get(key)
        if gate is None:
            return
        old_props = self.node_props.get(key, set())
        while True:
            new_props = set(gate.child_props(self.obs))
            decided = []
            for p in new_props - old_props:
                if self._is_atom[p[0]]:
                    v = self._try_eval_atom(p)
                    if v.is_boolean:
                        decided.append((p, v is T))
            if not decided:
                break
            for p, b in decided:
                gate.resolve_child(p, b)
        for p in old_props - new_props:
            self._drop_edge(p, key)
        is_pred = self._is_pred
        for p in new_props - old_props:
            self.out_edges.setdefault(p, set()).add(key)
            if is_pred[p[0]]:
                self.atom_props_at.setdefault(p[1], set()).add(p)
        self.node_props[key] = new_props
        new_refs = set(gate.referenced_intervals(self.obs))
        old_refs = self.node_refs.get(key, set())
        for iv in old_refs - new_refs:
            bucket = self.refs_at.get(iv)
            if bucket is not None:
                bucket.discard(key)
                if not bucket:
                    del self.refs_at[iv]
        for iv in new_refs - old_refs:
            self.refs_at.setdefault(iv, set()).add(key)
        self.node_refs[key] = new_refs

    def _fold_atoms(self, gate: Gate) -> None:
        """Resolve atomic child props that are decidable right now (rigid
        comparisons once bound, predicates at fact-bearing time points)."""
        while True:
            resolved = []
            for p in gate.child_props(self.obs):
                if not self._is_atom[p[0]]:
                    continue
                v = self._try_eval_atom(p)
                if v.is_boolean:
                    resolved.append((p, v is T))
            if not resolved:
                return
            for p, b in resolved:
                gate.resolve_child(p, b)

    def _try_eval_atom(self, prop: PropKey) -> Truth3:
        sub, iv, nu = prop
        f = self.table.nodes[sub]
        if isinstance(f, TrueF):
            return T
        if isinstance(f, Cmp):
            lhs = f.lhs.value if isinstance(f.lhs, Const) else v_get(nu, f.lhs.name)
            rhs = f.rhs.value if isinstance(f.rhs, Const) else v_get(nu, f.rhs.name)
            if lhs is None or rhs is None:
                return U
            return T if cmp_values(f.op, lhs, rhs) else F
        if isinstance(f, Pred):
            if not iv.is_singleton:
                return U
            facts = self.obs.facts_at(iv)
            if facts is None or f.name not in facts:
                return U
            args = []
            for t in f.args:
                got = t.value if isinstance(t, Const) else v_get(nu, t.name)
                if got is None:
                    return U
                args.append(got)
            return T if tuple(args) in facts[f.name] else F
        raise MonitorError(f"not an atom: {f!r}")

    # ------------------------------------------------------------ propagation

    def _emit(self, tau: Fraction, value: bool) -> None:
        seen = self.emitted.get(tau)
        if seen is not None:
            if seen != value:
                raise MonitorError(f"contradictory verdicts at {tau}: {seen} then {value}")
            return
        self.emitted[tau] = value
        self._batch.append(Verdict(tau, value))

    def _after_update(self, key: NodeKey) -> None:
        gate = self.nodes.get(key)
        if gate is None:
            return
        v = gate.value(self.obs)
        if not v.is_boolean:
            return
        if key[0] == self.table.root_index:
            if key[1].is_singleton:
                self._emit(key[1].singleton_value, v is T)
                self._unregister_node(key)
            else:
                self._strip_props(key)  # final value; stays for future clones
            return
        self._unregister_node(key)
        self._resolve_prop(key, v is T)

    def _strip_props(self, key: NodeKey) -> None:
        for p in self.node_props.get(key, set()):
            self._drop_edge(p, key)
        self.node_props[key] = set()
        for iv in self.node_refs.get(key, set()):
            bucket = self.refs_at.get(iv)
            if bucket is not None:
                bucket.discard(key)
                if not bucket:
                    del self.refs_at[iv]
        self.node_refs[key] = set()

    def _resolve_prop(self, prop: PropKey, b: bool) -> None:
        parents = self.out_edges.pop(prop, None)
        if isinstance(self.table.nodes[prop[0]], Pred):
            ap = self.atom_props_at.get(prop[1])
            if ap is not None:
                ap.discard(prop)
                if not ap:
                    del self.atom_props_at[prop[1]]
        if not parents:
            return
        for parent in list(parents):
            gate = self.nodes.get(parent)
            if gate is None:
                continue
            gate.resolve_child(prop, b)
            self._sync_node(parent)
            self._after_update(parent)

    def _drain_gc(self) -> None:
        while self._gcq:
            prop = self._gcq.pop()
            if not self.gc_enabled:
                continue
            if prop in self.out_edges:
                continue
            if prop[0] == self.table.root_index:
                continue
            if prop in self.nodes:
                self._unregister_node(prop)

    # --------------------------------------------------------- transformations

    def add_time_point(self, gap: Interval, tau: Fraction) -> List[Verdict]:
        """T1: split `gap` at `tau`, clone its nodes, refine references."""
        self._batch = []
        current = self.obs.gap_containing(tau)
        if current is None or current != gap:
            raise ObservationError(
                f"interval {gap} is not the current gap containing {tau}"
            )
        _, pieces = self.obs.split(tau)

        clone_keys: List[NodeKey] = []
        for key in list(self.nodes_at.get(gap, ())):
            gate = self.nodes.get(key)
            if gate is None:
                continue
            for piece in pieces:
                clone = gate.clone()
                clone.own = piece
                clone_key = (key[0], piece, key[2])
                self._register_node(clone_key, clone, fold=False)
                clone_keys.append(clone_key)
                if key[0] == self.table.root_index:
                    self._after_update(clone_key)  # Boolean {tau} clone: verdict now
            self._unregister_node(key)

        # Clones may turn Boolean purely through instantiation against their
        # narrower interval, so they are refined even without gap references.
        touched = set(self.refs_at.get(gap, ()))
        touched.update(clone_keys)
        for key in sorted(touched, key=_node_order):
            gate = self.nodes.get(key)
            if gate is None:
                continue
            gate.refine_split(gap, pieces, self.obs)
            self._sync_node(key)
            self._after_update(key)

        self._drain_gc()
        self._maybe_check()
        return self._take_batch()

    def remove_interval(self, gap: Interval) -> List[Verdict]:
        """T2: a knowledge gap turned out to contain no time points."""
        self._batch = []
        self.obs.remove(gap)
        for key in list(self.refs_at.get(gap, ())):
            gate = self.nodes.get(key)
            if gate is None or gate.own == gap:
                continue
            gate.drop_interval(gap)
            self._sync_node(key)
            self._after_update(key)
        for key in list(self.nodes_at.get(gap, ())):
            self._unregister_node(key)
        self._drain_gc()
        self._maybe_check()
        return self._take_batch()

    def set_facts(self, tau: Fraction, pred: str, rel: Iterable[Tuple]) -> List[Verdict]:
        """T3.1: one predicate's interpretation arrives at a time point."""
        self._batch = []
        self.obs.set_facts(tau, pred, rel)
        point = Interval.point(tau)
        for prop in list(self.atom_props_at.get(point, ())):
            f = self.table.nodes[prop[0]]
            if not isinstance(f, Pred) or f.name != pred:
                continue
            v = self._try_eval_atom(prop)
            if v.is_boolean:
                self._resolve_prop(prop, v is T)
        self._drain_gc()
        self._maybe_check()
        return self._take_batch()

    def set_register(self, tau: Fraction, register: str, value) -> List[Verdict]:
        """T3.2: a register value arrives; bindings propagate down."""
        self._batch = []
        self.obs.set_register(tau, register, value)
        freeze_idx = self.table.registers.get(register)
        if freeze_idx is None:
            self._maybe_check()
            return self._take_batch()
        freeze = self.table.nodes[freeze_idx]
        point = Interval.point(tau)
        keys = [k for k in list(self.nodes_at.get(point, ())) if k[0] == freeze_idx]
        for key in keys:
            gate = self.nodes.get(key)
            if not isinstance(gate, FreezeGate) or gate.known is not None:
                continue
            old_child_nu = gate.rename_child(freeze.var, value)
            self._sync_node(key)
            self._propagate_data_value(gate.child, point, old_child_nu, freeze.var, value)
            self._after_update(key)
        self._drain_gc()
        self._maybe_check()
        return self._take_batch()

    def propagate_truth_value(
        self, sub: int, interval: Interval, nu: Valuation, b: bool
    ) -> List[Verdict]:
        """Feed one determined proposition into every gate that contains it."""
        self._batch = []
        self._resolve_prop((sub, interval, nu), b)
        self._drain_gc()
        return self._take_batch()

    def propagate_data_value(
        self, sub: int, interval: Interval, nu: Valuation, var: str, value
    ) -> List[Verdict]:
        self._batch = []
        self._propagate_data_value(sub, interval, nu, var, value)
        self._drain_gc()
        return self._take_batch()

    def _propagate_data_value(
        self, sub: int, interval: Interval, nu: Valuation, var: str, value
    ) -> None:
        extended = v_set(nu, var, value)
        f = self.table.nodes[sub]
        if is_atomic(f):
            prop = (sub, interval, extended)
            v = self._try_eval_atom(prop)
            if v.is_boolean:
                self._resolve_prop(prop, v is T)
            return
        target = (sub, interval, extended)
        existing = self.nodes.get(target)
        if existing is not None:
            v = existing.value(self.obs)
            if v.is_boolean:
                # Happens only when garbage collection is off; re-announce.
                self._resolve_prop(target, v is T)
            return
        source = self.nodes.get((sub, interval, nu))
        if source is None:
            return  # source already boolean and propagated earlier
        clone = source.with_binding(var, value)
        self._register_node(target, clone)
        for p in list(self.node_props.get(target, ())):
            self._propagate_data_value(p[0], p[1], v_del(p[2], var), var, value)
        self._after_update(target)

    # ----------------------------------------------------------------- output

    def _take_batch(self) -> List[Verdict]:
        out = sorted(self._batch, key=lambda v: v.ts)
        self._batch = []
        return out

    # ------------------------------------------------------------- inspection

    def snapshot_observation(self) -> Observation:
        return self.obs.snapshot()

    def stats(self) -> Dict[str, int]:
        return {
            "nodes": len(self.nodes),
            "edges": sum(len(s) for s in self.out_edges.values()),
            "peak_nodes": self.peak_nodes,
            "verdicts": len(self.emitted),
        }

    def node_truth(self, key: NodeKey) -> Truth3:
        return self.nodes[key].value(self.obs)

    def snapshot_nodes_edges(self, include_atoms: bool = True):
        """Graph view for golden tests: atom propositions shown as leaf nodes."""
        nodes = set(self.nodes)
        edges = set()
        for prop, parents in self.out_edges.items():
            if prop not in self.nodes:
                if not include_atoms or not is_atomic(self.table.nodes[prop[0]]):
                    continue
                nodes.add(prop)
            for parent in parents:
                edges.add((prop, parent))
        return nodes, edges

    def list_links(self, key: NodeKey) -> Tuple[Optional[NodeKey], Optional[NodeKey]]:
        """Neighbors in the interval-ordered list of nodes sharing
        (subformula, valuation)."""
        sub, interval, nu = key
        siblings = sorted(
            (k for k in self.nodes if k[0] == sub and k[2] == nu),
            key=lambda k: k[1].sort_key(),
        )
        i = siblings.index(key)
        before = siblings[i - 1] if i > 0 else None
        after = siblings[i + 1] if i + 1 < len(siblings) else None
        return before, after

    def validate_against_oracle(self) -> None:
        """Lemma-5.5 style invariant: every node's value equals the reference
        semantics on the current observation."""
        w = self.snapshot_observation()
        oracle = Oracle(self.table, w)
        pos = {w.interval_at(i): i for i in w.positions()}
        for (sub, interval, nu), gate in self.nodes.items():
            expected = oracle.eval(pos[interval], nu, self.table.nodes[sub])
            actual = gate.value(self.obs)
            if expected is not actual:
                raise MonitorError(
                    f"node invariant broken at ({sub}, {interval}, {nu}): "
                    f"monitor={actual} oracle={expected}"
                )

    def _maybe_check(self) -> None:
        if self.debug_checks:
            self.validate_against_oracle()

    # --------------------------------------------------------------- pruning

    def prune_history(self) -> int:
        """Drop letters no gate references anymore (left of every live ref)."""
        keys = [iv.sort_key() for iv in self.refs_at]
        keys.extend(iv.sort_key() for iv in self.nodes_at)
        if not keys:
            return 0
        cutoff = min(keys)
        keep: Optional[Interval] = None
        cell = self.obs.first
        while cell is not None:
            if cell.interval.sort_key() >= cutoff:
                keep = cell.interval
                break
            cell = cell.next
        if keep is None:
            return 0
        return self.obs.prune_before(keep)
