"""Symbolic GF(2) tracking of quantum one-time-pad keys.

Every key bit evolves as an affine boolean form (a constant XORed with a set
of variables) over the initial-key bits ``x0(w)/z0(w)`` and the
measurement-outcome bits ``rx(i)/rz(i)``.  From a circuit this module derives
the two plan flavours the evaluation protocol ships to the decryptor:

* ``gt``   - one basis-bit form ``g_i`` per T/TD round over the *global*
  alphabet, plus a single final-key map ``f`` of 2n forms.
* ``vgt``  - per-round forms over a fresh 2n-variable alphabet: ``g_i`` reads
  the previous intermediate key, ``f_i`` produces the next one from it and
  the round's two outcome bits, and a last map turns the final intermediate
  key into the decryption key.

Round-local variables are ordinary x/z variables carrying a ``tag`` equal to
the gate index of the previous T/TD gate (0 for the initial key), so they
print as ``x3(1)``, ``z5(2)`` and so on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .circuits import Circuit, T_KINDS
from .qsim import GateId

GT = "gt"
VGT = "vgt"


@dataclass(frozen=True)
class Var:
    """One GF(2) variable.

    ``kind`` is ``"x"``/``"z"`` (key bit of wire ``index``, subscript
    ``tag``) or ``"rx"``/``"rz"`` (outcome bit of round ``index``; ``tag``
    is unused and fixed to 0).
    """

    kind: str
    index: int
    tag: int = 0

    def __post_init__(self):
        if self.kind not in ("x", "z", "rx", "rz"):
            raise ValueError(f"unknown variable kind {self.kind!r}")
        if self.index < 1 or self.tag < 0:
            raise ValueError(f"bad variable {self.kind}/{self.index}/{self.tag}")
        if self.kind in ("rx", "rz") and self.tag != 0:
            raise ValueError("outcome variables carry no tag")

    def name(self) -> str:
        if self.kind in ("rx", "rz"):
            return f"{self.kind}({self.index})"
        return f"{self.kind}{self.tag}({self.index})"

    def sort_key(self) -> tuple[int, int, int]:
        # canonical order: x0 < z0 < x<tag> < z<tag> < rx < rz, then index
        if self.kind == "x":
            group = 0 if self.tag == 0 else 2
        elif self.kind == "z":
            group = 1 if self.tag == 0 else 3
        elif self.kind == "rx":
            group = 4
        else:
            group = 5
        return (group, self.tag, self.index)


def x_var(wire: int, tag: int = 0) -> Var:
    return Var("x", wire, tag)


def z_var(wire: int, tag: int = 0) -> Var:
    return Var("z", wire, tag)


def rx_var(round_: int) -> Var:
    return Var("rx", round_)


def rz_var(round_: int) -> Var:
    return Var("rz", round_)


@dataclass(frozen=True)
class AffineBoolExpr:
    """``constant XOR (xor of vars)``; canonical because vars is a set."""

    constant: int = 0
    vars: frozenset[Var] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.constant not in (0, 1):
            raise ValueError("constant must be a bit")
        object.__setattr__(self, "vars", frozenset(self.vars))

    @staticmethod
    def of(v: Var) -> "AffineBoolExpr":
        return AffineBoolExpr(0, frozenset((v,)))

    @staticmethod
    def const(bit: int) -> "AffineBoolExpr":
        return AffineBoolExpr(int(bit), frozenset())

    def __xor__(self, other: "AffineBoolExpr") -> "AffineBoolExpr":
        return AffineBoolExpr(
            self.constant ^ other.constant, self.vars.symmetric_difference(other.vars)
        )

    @property
    def arity(self) -> int:
        return len(self.vars)

    def sorted_vars(self) -> list[Var]:
        return sorted(self.vars, key=Var.sort_key)

    def evaluate(self, assignment: Mapping[Var, int]) -> int:
        bit = self.constant
        for v in self.vars:
            try:
                bit ^= assignment[v] & 1
            except KeyError:
                raise KeyError(f"unassigned variable {v.name()}") from None
        return bit

    def to_json(self) -> dict:
        return {"const": self.constant, "vars": [v.name() for v in self.sorted_vars()]}

    def __str__(self) -> str:
        terms = [v.name() for v in self.sorted_vars()]
        if self.constant or not terms:
            terms = [str(self.constant)] + terms
        return " + ".join(terms)


def eval_expr(expr: AffineBoolExpr, assignment: Mapping[Var, int]) -> int:
    """Evaluate an affine form; raises ``KeyError`` on an unassigned variable."""
    return expr.evaluate(assignment)


@dataclass(frozen=True)
class KeyExprState:
    """The symbolic key pair ``(x(w), z(w))`` per wire after some prefix of
    gates, plus the number of T/TD rounds consumed so far."""

    num_wires: int
    xexprs: tuple[AffineBoolExpr, ...]
    zexprs: tuple[AffineBoolExpr, ...]
    rounds_consumed: int = 0

    def __post_init__(self):
        if len(self.xexprs) != self.num_wires or len(self.zexprs) != self.num_wires:
            raise ValueError("one (x, z) expression pair per wire required")

    @staticmethod
    def initial(num_wires: int, tag: int = 0, rounds_consumed: int = 0) -> "KeyExprState":
        xs = tuple(AffineBoolExpr.of(x_var(w, tag)) for w in range(1, num_wires + 1))
        zs = tuple(AffineBoolExpr.of(z_var(w, tag)) for w in range(1, num_wires + 1))
        return KeyExprState(num_wires, xs, zs, rounds_consumed)

    def pair(self, wire: int) -> tuple[AffineBoolExpr, AffineBoolExpr]:
        return self.xexprs[wire - 1], self.zexprs[wire - 1]

    def rows(self) -> tuple[AffineBoolExpr, ...]:
        """All 2n forms, x rows for wires 1..n then z rows for wires 1..n."""
        return self.xexprs + self.zexprs


def update_key(
    keys: KeyExprState, g: GateId, round_: Optional[int] = None
) -> KeyExprState:
    """Advance the symbolic key past one gate.

    Untouched wires are unchanged.  X/Z leave the pair alone, H swaps it,
    P maps ``z`` to ``x^z``, and CNOT (control w, target w') maps
    ``z(w) ^= z(w')`` and ``x(w') ^= x(w)``.  A T or TD gate consumes round
    ``round_`` (which must be ``rounds_consumed + 1``) and folds in the fresh
    outcome variables: T maps ``(x, z)`` to ``(x^rx(i), x^z^rz(i))`` and TD
    to ``(x^rx(i), z^rz(i))``.
    """
    is_t = g.kind in T_KINDS
    if is_t:
        if round_ is None:
            raise ValueError(f"{g.kind} requires a round number")
        if round_ != keys.rounds_consumed + 1:
            raise ValueError(
                f"round {round_} out of order (expected {keys.rounds_consumed + 1})"
            )
    elif round_ is not None:
        raise ValueError(f"{g.kind} does not consume a round")
    for w in g.wires:
        if w > keys.num_wires:
            raise ValueError(f"wire {w} out of range 1..{keys.num_wires}")

    xs = list(keys.xexprs)
    zs = list(keys.zexprs)
    if g.kind in ("X", "Z"):
        pass
    elif g.kind == "H":
        w = g.wires[0] - 1
        xs[w], zs[w] = zs[w], xs[w]
    elif g.kind == "P":
        w = g.wires[0] - 1
        zs[w] = xs[w] ^ zs[w]
    elif g.kind == "CNOT":
        w, wp = g.wires[0] - 1, g.wires[1] - 1
        zs[w] = zs[w] ^ zs[wp]
        xs[wp] = xs[w] ^ xs[wp]
    elif g.kind == "T":
        w = g.wires[0] - 1
        xs[w], zs[w] = (
            xs[w] ^ AffineBoolExpr.of(rx_var(round_)),
            xs[w] ^ zs[w] ^ AffineBoolExpr.of(rz_var(round_)),
        )
    elif g.kind == "TD":
        w = g.wires[0] - 1
        xs[w], zs[w] = (
            xs[w] ^ AffineBoolExpr.of(rx_var(round_)),
            zs[w] ^ AffineBoolExpr.of(rz_var(round_)),
        )
    else:
        raise ValueError(f"no key-updating rule for gate {g.kind}")
    return KeyExprState(
        keys.num_wires,
        tuple(xs),
        tuple(zs),
        keys.rounds_consumed + (1 if is_t else 0),
    )


def update_key_bits(
    xbits: Sequence[int],
    zbits: Sequence[int],
    g: GateId,
    outcome: Optional[tuple[int, int]] = None,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Concrete counterpart of :func:`update_key` on bit values.

    ``outcome`` is the ``(rx, rz)`` pair and must be given exactly for T/TD.
    """
    xs = list(int(b) for b in xbits)
    zs = list(int(b) for b in zbits)
    if g.kind in T_KINDS:
        if outcome is None:
            raise ValueError(f"{g.kind} requires a measurement outcome")
        rx, rz = int(outcome[0]), int(outcome[1])
    elif outcome is not None:
        raise ValueError(f"{g.kind} takes no measurement outcome")
    if g.kind in ("X", "Z"):
        pass
    elif g.kind == "H":
        w = g.wires[0] - 1
        xs[w], zs[w] = zs[w], xs[w]
    elif g.kind == "P":
        w = g.wires[0] - 1
        zs[w] ^= xs[w]
    elif g.kind == "CNOT":
        w, wp = g.wires[0] - 1, g.wires[1] - 1
        zs[w] ^= zs[wp]
        xs[wp] ^= xs[w]
    elif g.kind == "T":
        w = g.wires[0] - 1
        xs[w], zs[w] = xs[w] ^ rx, xs[w] ^ zs[w] ^ rz
    elif g.kind == "TD":
        w = g.wires[0] - 1
        xs[w], zs[w] = xs[w] ^ rx, zs[w] ^ rz
    else:
        raise ValueError(f"no key-updating rule for gate {g.kind}")
    return tuple(xs), tuple(zs)


@dataclass(frozen=True)
class KeyUpdatePlan:
    """The classical functions shipped with an evaluated circuit.

    ``g[i-1]`` gives the measurement-basis bit of round ``i``.  For ``gt``,
    ``f_final`` holds the 2n final-key forms over the global alphabet.  For
    ``vgt``, ``f_rounds[i-1]`` holds the 2n forms of round ``i`` over the
    previous intermediate key plus ``rx(i)/rz(i)``, ``f_final`` maps the last
    intermediate key to the decryption key, and ``key_tags[i]`` records the
    variable tag (previous T/TD gate index, ``key_tags[0] == 0``) used by
    round ``i+1``'s alphabet.

    Row order everywhere: x rows for wires 1..n, then z rows for wires 1..n.
    """

    scheme: str
    num_wires: int
    num_rounds: int
    g: tuple[AffineBoolExpr, ...]
    f_final: tuple[AffineBoolExpr, ...]
    f_rounds: tuple[tuple[AffineBoolExpr, ...], ...] = ()
    key_tags: tuple[int, ...] = (0,)

    def __post_init__(self):
        if self.scheme not in (GT, VGT):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if len(self.g) != self.num_rounds:
            raise ValueError("one g form per round required")
        if len(self.f_final) != 2 * self.num_wires:
            raise ValueError("f_final must have 2n rows")
        if self.scheme == GT and self.f_rounds:
            raise ValueError("gt plans have no per-round f maps")
        if self.scheme == VGT:
            if len(self.f_rounds) != self.num_rounds:
                raise ValueError("one f map per round required")
            if len(self.key_tags) != self.num_rounds + 1:
                raise ValueError("key_tags must list j_0..j_M")


def derive_plan_gt(circuit: Circuit) -> KeyUpdatePlan:
    """Derive the monolithic plan: global-alphabet ``g_i`` and final map."""
    keys = KeyExprState.initial(circuit.num_wires)
    g = []
    for gid in circuit.gates:
        if gid.kind in T_KINDS:
            g.append(keys.xexprs[gid.wires[0] - 1])
            keys = update_key(keys, gid, keys.rounds_consumed + 1)
        else:
            keys = update_key(keys, gid)
    return KeyUpdatePlan(GT, circuit.num_wires, len(g), tuple(g), keys.rows())


def derive_plan_vgt(circuit: Circuit) -> KeyUpdatePlan:
    """Derive the factored plan with round-local alphabets.

    After each T/TD gate the symbolic state is rebased onto fresh variables
    tagged with that gate's index, so every ``g_i`` reads at most 2n
    variables and every ``f_i`` row at most 2n+2.
    """
    n = circuit.num_wires
    keys = KeyExprState.initial(n, tag=0)
    g = []
    f_rounds = []
    tags = [0]
    for j, gid in enumerate(circuit.gates, start=1):
        if gid.kind in T_KINDS:
            i = keys.rounds_consumed + 1
            g.append(keys.xexprs[gid.wires[0] - 1])
            keys = update_key(keys, gid, i)
            f_rounds.append(keys.rows())
            keys = KeyExprState.initial(n, tag=j, rounds_consumed=i)
            tags.append(j)
        else:
            keys = update_key(keys, gid)
    return KeyUpdatePlan(
        VGT,
        n,
        len(g),
        tuple(g),
        keys.rows(),
        tuple(f_rounds),
        tuple(tags),
    )


def derive_plan(scheme: str, circuit: Circuit) -> KeyUpdatePlan:
    if scheme == GT:
        return derive_plan_gt(circuit)
    if scheme == VGT:
        return derive_plan_vgt(circuit)
    raise ValueError(f"unknown scheme {scheme!r}")


def _rows_to_json(rows: Iterable[AffineBoolExpr], n: int) -> dict:
    rows = tuple(rows)
    return {
        "x": [e.to_json() for e in rows[:n]],
        "z": [e.to_json() for e in rows[n:]],
    }


def plan_to_json(plan: KeyUpdatePlan) -> dict:
    """Structured form of a plan with canonical variable naming and order."""
    n = plan.num_wires
    out = {
        "scheme": plan.scheme,
        "n": n,
        "M": plan.num_rounds,
        "g": [e.to_json() for e in plan.g],
    }
    if plan.scheme == GT:
        out["f"] = _rows_to_json(plan.f_final, n)
    else:
        out["key_tags"] = list(plan.key_tags)
        out["f_rounds"] = [_rows_to_json(rows, n) for rows in plan.f_rounds]
        out["f_final"] = _rows_to_json(plan.f_final, n)
    return out


def plan_to_text(plan: KeyUpdatePlan) -> str:
    """Deterministic JSON rendering; identical circuits give identical bytes."""
    return json.dumps(plan_to_json(plan), indent=2, sort_keys=True) + "\n"
