"""Gate state per graph node.

A gate never stores an explicit propositional formula.  It keeps the Boolean
knowledge propagated into it (child truth values, per interval) and derives
everything interval-shaped (tp, mc, neighbor layout) from the intervals
themselves, so its three-valued value always equals the semantics of the
corresponding instantiated formula over the current observation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Set, Tuple

from ..intervals import Interval, interval_mc
from ..truth import F, T, Truth3, U, and3, from_bool, not3, or3
from ..valuation import Valuation, v_set

PropKey = Tuple[int, Interval, Valuation]  # subformula proposition α^{K,ν}

_ZERO_POINT = Interval.point(Fraction(0))


@dataclass(frozen=True)
class TpProp:
    interval: Interval


@dataclass(frozen=True)
class TpBarProp:
    interval: Interval


@dataclass(frozen=True)
class McProp:
    later: Interval
    earlier: Interval


def _tp3(interval: Interval) -> Truth3:
    # Never false: a gap can still produce a time point in some refinement.
    return T if interval.is_singleton else U


class GateError(AssertionError):
    pass


class Gate:
    """Shared bookkeeping-free base; subclasses hold all state."""

    kind = "?"

    def __init__(self, own: Interval, nu: Valuation):
        self.own = own
        self.nu = nu

    # Interface used by the graph; ctx is the live ObsState.
    def value(self, ctx) -> Truth3:
        raise NotImplementedError

    def child_props(self, ctx) -> Iterable[PropKey]:
        raise NotImplementedError

    def referenced_intervals(self, ctx) -> Set[Interval]:
        raise NotImplementedError

    def resolve_child(self, prop: PropKey, b: bool) -> None:
        raise NotImplementedError

    def clone(self) -> "Gate":
        raise NotImplementedError

    def with_binding(self, var: str, value) -> "Gate":
        g = self.clone()
        g.nu = v_set(g.nu, var, value)
        return g

    def refine_split(self, gap: Interval, pieces: List[Interval], ctx) -> None:
        """Re-key references to a split gap onto its replacement pieces."""

    def drop_interval(self, gap: Interval) -> None:
        """tp^gap ↦ f after a T2 removal."""

    # -- the abstract gate interface (Clone/IsBool/... are thin aliases) -----

    def is_bool(self, ctx) -> bool:
        return self.value(ctx).is_boolean

    def to_bool(self, ctx) -> bool:
        v = self.value(ctx)
        if not v.is_boolean:
            raise GateError(f"gate is not boolean: {v}")
        return v is T

    def contains(self, prop, ctx) -> bool:
        if isinstance(prop, tuple):
            return prop in set(self.child_props(ctx))
        if isinstance(prop, (TpProp, TpBarProp)):
            return prop.interval in self.referenced_intervals(ctx)
        if isinstance(prop, McProp):
            return (
                prop.later in self.referenced_intervals(ctx)
                and prop.earlier in self.referenced_intervals(ctx)
            )
        return False

    def eval_subst(self, subst: Dict, ctx) -> None:
        """Substitute Boolean constants for propositions."""
        for prop, b in subst.items():
            if isinstance(prop, tuple):
                self.resolve_child(prop, b)
            elif isinstance(prop, TpProp):
                if b:
                    raise GateError("tp is instantiated true only via interval shape")
                self.drop_interval(prop.interval)
            else:
                raise GateError(f"cannot substitute for {prop!r}")


class PassGate(Gate):
    """Identity gate; lets an atomic root participate in the node machinery."""

    kind = "pass"

    def __init__(self, own: Interval, nu: Valuation, child: int):
        super().__init__(own, nu)
        self.child = child
        self.known: Optional[bool] = None
        self.child_nu = nu

    def value(self, ctx) -> Truth3:
        return U if self.known is None else from_bool(self.known)

    def child_props(self, ctx):
        if self.known is None:
            yield (self.child, self.own, self.child_nu)

    def referenced_intervals(self, ctx):
        return {self.own}

    def resolve_child(self, prop: PropKey, b: bool) -> None:
        self.known = b

    def clone(self) -> "PassGate":
        g = PassGate(self.own, self.nu, self.child)
        g.known = self.known
        g.child_nu = self.child_nu
        return g

    def with_binding(self, var: str, value) -> "PassGate":
        g = self.clone()
        g.nu = v_set(g.nu, var, value)
        g.child_nu = v_set(g.child_nu, var, value)
        return g


class NotGate(Gate):
    kind = "not"

    def __init__(self, own: Interval, nu: Valuation, child: int):
        super().__init__(own, nu)
        self.child = child
        self.known: Optional[bool] = None

    def value(self, ctx) -> Truth3:
        return U if self.known is None else from_bool(not self.known)

    def child_props(self, ctx):
        if self.known is None:
            yield (self.child, self.own, self.nu)

    def referenced_intervals(self, ctx):
        return {self.own}

    def resolve_child(self, prop: PropKey, b: bool) -> None:
        self.known = b

    def clone(self) -> "NotGate":
        g = NotGate(self.own, self.nu, self.child)
        g.known = self.known
        return g


class OrGate(Gate):
    kind = "or"

    def __init__(self, own: Interval, nu: Valuation, left: int, right: int):
        super().__init__(own, nu)
        self.left = left
        self.right = right
        self.known_left: Optional[bool] = None
        self.known_right: Optional[bool] = None

    def value(self, ctx) -> Truth3:
        l = U if self.known_left is None else from_bool(self.known_left)
        r = U if self.known_right is None else from_bool(self.known_right)
        return or3(l, r)

    def child_props(self, ctx):
        if self.known_left is None:
            yield (self.left, self.own, self.nu)
        if self.known_right is None and self.right != self.left:
            yield (self.right, self.own, self.nu)

    def referenced_intervals(self, ctx):
        return {self.own}

    def resolve_child(self, prop: PropKey, b: bool) -> None:
        if prop[0] == self.left:
            self.known_left = b
        if prop[0] == self.right:
            self.known_right = b

    def clone(self) -> "OrGate":
        g = OrGate(self.own, self.nu, self.left, self.right)
        g.known_left = self.known_left
        g.known_right = self.known_right
        return g


class FreezeGate(Gate):
    """Single proposition whose valuation is rewritten by a T3.2 event."""

    kind = "freeze"

    def __init__(self, own: Interval, nu: Valuation, child: int):
        super().__init__(own, nu)
        self.child = child
        self.child_nu = nu
        self.known: Optional[bool] = None

    def value(self, ctx) -> Truth3:
        return U if self.known is None else from_bool(self.known)

    def child_props(self, ctx):
        if self.known is None:
            yield (self.child, self.own, self.child_nu)

    def referenced_intervals(self, ctx):
        return {self.own}

    def resolve_child(self, prop: PropKey, b: bool) -> None:
        self.known = b

    def rename_child(self, var: str, value) -> Valuation:
        """The T3.2 rename; returns the child's previous valuation."""
        old = self.child_nu
        self.child_nu = v_set(old, var, value)
        return old

    def clone(self) -> "FreezeGate":
        g = FreezeGate(self.own, self.nu, self.child)
        g.child_nu = self.child_nu
        g.known = self.known
        return g

    def with_binding(self, var: str, value) -> "FreezeGate":
        g = self.clone()
        g.nu = v_set(g.nu, var, value)
        g.child_nu = v_set(g.child_nu, var, value)
        return g


@dataclass
class Anchor:
    beta_true: bool = False  # right operand known true here
    mc_true: bool = False    # metric constraint known satisfied


# Continuation knowledge: "?" unresolved, "n" left operand known false on a gap.
_CONT_UNKNOWN = "?"
_CONT_NEG = "n"


class TemporalGate(Gate):
    """Since/Until gate: anchor and continuation records per interval.

    fwd=True is Until (anchors at or after the gate's interval), fwd=False is
    Since.  An anchor record disappears the moment its disjunct is false; the
    gate is false exactly when no anchor record remains.
    """

    def __init__(
        self,
        own: Interval,
        nu: Valuation,
        fwd: bool,
        left: int,
        right: int,
        constraint: Interval,
        left_const: Optional[bool] = None,
        right_const: Optional[bool] = None,
    ):
        super().__init__(own, nu)
        self.fwd = fwd
        self.left = left
        self.right = right
        self.constraint = constraint
        self.left_const = left_const    # for TRUE / constant comparisons
        self.right_const = right_const
        self.anchors: Dict[Interval, Anchor] = {}
        self.conts: Dict[Interval, str] = {}

    @property
    def kind(self):  # type: ignore[override]
        return "until" if self.fwd else "since"

    # -- construction helpers -------------------------------------------------

    def mc3(self, anchor_iv: Interval) -> Truth3:
        if self.fwd:
            return interval_mc(anchor_iv, self.own, self.constraint)
        return interval_mc(self.own, anchor_iv, self.constraint)

    def seed_initial(self) -> None:
        """Entries for the single-interval initial observation."""
        self._add_anchor(self.own, beta_true=self.right_const is True)
        if self.right_const is False:
            self.anchors.pop(self.own, None)
        self._seed_cont(self.own)

    def _seed_cont(self, iv: Interval) -> None:
        if self.left_const is True:
            return
        if self.left_const is False:
            self._cont_set(iv, _CONT_NEG)
        else:
            self.conts[iv] = _CONT_UNKNOWN

    def _add_anchor(self, iv: Interval, beta_true: bool) -> None:
        mc = self.mc3(iv)
        if mc is F:
            return
        self.anchors[iv] = Anchor(beta_true=beta_true, mc_true=mc is T)

    def _cont_set(self, iv: Interval, state: str) -> None:
        if state == _CONT_NEG and iv.is_singleton:
            self._cont_false(iv)
        else:
            self.conts[iv] = state

    def _cont_false(self, iv: Interval) -> None:
        """A continuation became false: anchors strictly beyond it die."""
        key = iv.sort_key()
        self.conts.pop(iv, None)
        if self.fwd:
            doomed_a = [a for a in self.anchors if a.sort_key() > key]
            doomed_c = [c for c in self.conts if c.sort_key() > key]
        else:
            doomed_a = [a for a in self.anchors if a.sort_key() < key]
            doomed_c = [c for c in self.conts if c.sort_key() < key]
        for a in doomed_a:
            del self.anchors[a]
        for c in doomed_c:
            del self.conts[c]

    # -- gate interface --------------------------------------------------------

    def value(self, ctx) -> Truth3:
        if not self.anchors:
            return F
        # The anchor closest to the gate's interval is blocked by the fewest
        # continuations, so it decides whether the gate is already true.
        best = None
        for iv, rec in self.anchors.items():
            if rec.beta_true and rec.mc_true and iv.is_singleton:
                key = iv.sort_key()
                if best is None or (key < best if self.fwd else key > best):
                    best = key
        if best is None:
            return U
        for cont in self.conts:
            ck = cont.sort_key()
            if ck < best if self.fwd else ck > best:
                return U
        return T

    def child_props(self, ctx):
        for iv, rec in self.anchors.items():
            if not rec.beta_true and self.right_const is None:
                yield (self.right, iv, self.nu)
        if self.left_const is None:
            for iv, state in self.conts.items():
                if state == _CONT_UNKNOWN:
                    yield (self.left, iv, self.nu)

    def referenced_intervals(self, ctx):
        refs = set(self.anchors)
        refs.update(self.conts)
        refs.add(self.own)
        return refs

    def resolve_child(self, prop: PropKey, b: bool) -> None:
        sub, iv, _ = prop
        if sub == self.right and iv in self.anchors:
            if b:
                self.anchors[iv].beta_true = True
            else:
                del self.anchors[iv]
        if sub == self.left and iv in self.conts:
            if b:
                del self.conts[iv]
            else:
                self._cont_set(iv, _CONT_NEG)

    def clone(self) -> "TemporalGate":
        g = TemporalGate(
            self.own, self.nu, self.fwd, self.left, self.right,
            self.constraint, self.left_const, self.right_const,
        )
        g.anchors = {iv: Anchor(rec.beta_true, rec.mc_true) for iv, rec in self.anchors.items()}
        g.conts = dict(self.conts)
        return g

    def refine_split(self, gap: Interval, pieces: List[Interval], ctx) -> None:
        anchor_rec = self.anchors.pop(gap, None)
        cont_state = self.conts.pop(gap, None)
        own_key = self.own.sort_key()
        onside = [
            p
            for p in pieces
            if (p.sort_key() >= own_key if self.fwd else p.sort_key() <= own_key)
        ]
        if anchor_rec is not None:
            for piece in onside:
                self._add_anchor(piece, beta_true=anchor_rec.beta_true)
        if self.own in pieces:
            # The gate's own interval changed shape: metric constraints re-key.
            for iv in list(self.anchors):
                mc = self.mc3(iv)
                if mc is F:
                    del self.anchors[iv]
                elif mc is T:
                    self.anchors[iv].mc_true = True
        if cont_state is not None:
            # Set all inherited continuations before any false continuation
            # prunes anchors beyond it.
            falsified = []
            for piece in onside:
                if cont_state == _CONT_NEG and piece.is_singleton:
                    falsified.append(piece)
                else:
                    self.conts[piece] = cont_state
            for piece in falsified:
                self._cont_false(piece)

    def drop_interval(self, gap: Interval) -> None:
        self.anchors.pop(gap, None)
        self.conts.pop(gap, None)

    # -- relevant-part access (abstract interface Add/Remove) ------------------

    def remove_part(self, sub: int, iv: Interval):
        """Detach and return the (sub, iv)-relevant part.

        Removal leaves the neutral constant behind: false for anchors, true
        for continuations.
        """
        if sub == self.right:
            return ("anchor", self.anchors.pop(iv, None))
        if sub == self.left:
            return ("cont", self.conts.pop(iv, None))
        raise GateError(f"subformula {sub} is not an operand of this gate")

    def add_part(self, sub: int, iv: Interval, part) -> None:
        role, payload = part
        if role == "anchor" and payload is not None:
            if sub != self.right:
                raise GateError("anchor parts belong to the right operand")
            self._add_anchor(iv, beta_true=payload.beta_true)
        elif role == "cont" and payload is not None:
            if sub != self.left:
                raise GateError("continuation parts belong to the left operand")
            self._cont_set(iv, payload)


class NextPrevGate(Gate):
    """Prev/Next gate; evaluates the c-part disjunction over the live layout.

    Only the operand's Boolean knowledge is stored; which c-parts exist, their
    metric constraints, and the tp guards are recomputed from the observation
    neighborhood, which keeps every split and removal case uniform.
    """

    def __init__(
        self,
        own: Interval,
        nu: Valuation,
        fwd: bool,
        body: int,
        constraint: Interval,
        body_const: Optional[bool] = None,
    ):
        super().__init__(own, nu)
        self.fwd = fwd
        self.body = body
        self.constraint = constraint
        self.body_const = body_const
        self.know: Dict[Interval, bool] = {}

    @property
    def kind(self):  # type: ignore[override]
        return "next" if self.fwd else "prev"

    def _window(self, ctx) -> List[Optional[Interval]]:
        step = 1 if self.fwd else -1
        n1 = ctx.neighbor(self.own, step)
        n2 = ctx.neighbor(self.own, 2 * step) if n1 is not None else None
        return [self.own, n1, n2]

    def _know3(self, iv: Interval) -> Truth3:
        if self.body_const is not None:
            return from_bool(self.body_const)
        got = self.know.get(iv)
        return U if got is None else from_bool(got)

    def _mc(self, a: Interval, b: Interval) -> Truth3:
        later, earlier = (a, b) if self.fwd else (b, a)
        return interval_mc(later, earlier, self.constraint)

    def value(self, ctx) -> Truth3:
        own, n1, n2 = self._window(ctx)
        if self.constraint == _ZERO_POINT:
            c0 = F
        else:
            c0 = and3(and3(self._mc(own, own), self._know3(own)), not3(_tp3(own)))
        if n1 is None:
            c1 = F
        else:
            c1 = and3(
                and3(self._mc(n1, own), self._know3(n1)),
                and3(_tp3(n1), _tp3(own)),
            )
        if n2 is None:
            c2 = F
        else:
            c2 = and3(and3(self._mc(n2, own), self._know3(n2)), not3(_tp3(n1)))
        return or3(or3(c0, c1), c2)

    def child_props(self, ctx):
        if self.body_const is not None:
            return
        for iv in self._window(ctx):
            if iv is not None and iv not in self.know:
                yield (self.body, iv, self.nu)

    def referenced_intervals(self, ctx):
        return {iv for iv in self._window(ctx) if iv is not None}

    def resolve_child(self, prop: PropKey, b: bool) -> None:
        self.know[prop[1]] = b

    def clone(self) -> "NextPrevGate":
        g = NextPrevGate(self.own, self.nu, self.fwd, self.body, self.constraint, self.body_const)
        g.know = dict(self.know)
        return g

    def refine_split(self, gap: Interval, pieces: List[Interval], ctx) -> None:
        if gap in self.know:
            b = self.know.pop(gap)
            for piece in pieces:
                self.know[piece] = b
        window = {iv for iv in self._window(ctx) if iv is not None}
        for iv in list(self.know):
            if iv not in window:
                del self.know[iv]

    def drop_interval(self, gap: Interval) -> None:
        self.know.pop(gap, None)
