"""Behavioral models of the analog building blocks and the clause module.

Every block is an ideal transfer function with hard saturation at the
op-amp rails.  No device equations, parasitics, or transient response:
the point of this module is to serve as an independent, deterministic
oracle for the dynamics pipeline, not as a SPICE replacement.

Signal conventions. All ports carry volts unless a name says otherwise
(the log amp input is a current in amperes).  State variables map onto
voltages 1:1 (v = 1 V means v = 1.0), except xl inside the long-term
channel, which is scaled by ``antilog_scale`` volts per unit so the
whole [0, M] range stays far from the rails.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DmmParams

__all__ = [
    "BlockConstants",
    "BlockGraph",
    "ClauseScalings",
    "adder",
    "antilog_amp",
    "bidirectional_switch",
    "clause_module",
    "comparator3",
    "integrator_cell",
    "log_amp",
    "multiplier",
    "parse_block_graph",
    "softmax_block",
    "subtractor",
]


@dataclass(frozen=True)
class BlockConstants:
    """Electrical constants shared by all blocks.

    v_diode is a free design choice; only the sign of the comparator
    flags is consumed downstream, so its exact value is non-critical.
    """

    rail: float = 5.0
    v_thermal: float = 0.02568
    v_diode: float = 0.6
    c_integrate: float = 10e-9
    log_gain: float = -0.375          # volts per decade
    log_ref_current: float = 1e-6     # amperes
    antilog_scale: float = 0.030      # volts
    multiplier_unit: float = 1.0      # volts
    time_units_per_second: float = 100.0


DEFAULT_CONSTANTS = BlockConstants()


def _clip(x, c: BlockConstants):
    return min(max(x, -c.rail), c.rail)


def adder(v1: float, v2: float, c: BlockConstants = DEFAULT_CONSTANTS) -> float:
    """Op-amp summing stage: v1 + v2, saturating at the rails."""
    return _clip(v1 + v2, c)


def subtractor(vp: float, vm: float, c: BlockConstants = DEFAULT_CONSTANTS) -> float:
    """Difference stage: vp - vm, saturating at the rails."""
    return _clip(vp - vm, c)


def multiplier(x: float, y: float, c: BlockConstants = DEFAULT_CONSTANTS) -> float:
    """Four-quadrant multiplier with output I-to-V loop: x*y / 1 V."""
    return _clip((x * y) / c.multiplier_unit, c)


def log_amp(i_in: float, c: BlockConstants = DEFAULT_CONSTANTS) -> float:
    """Logarithmic amplifier: -0.375 V per decade of input current.

    The input is a current referenced to 1 uA; it must be positive.
    """
    if i_in <= 0.0:
        raise ValueError("log_amp input current must be positive")
    return _clip(c.log_gain * math.log10(i_in / c.log_ref_current), c)


def antilog_amp(v_in: float, c: BlockConstants = DEFAULT_CONSTANTS) -> float:
    """Exponential amplifier: 30 mV * exp(-v_in / 30 mV)."""
    return _clip(c.antilog_scale * math.exp(-v_in / c.antilog_scale), c)


def softmax_block(x, c: BlockConstants = DEFAULT_CONSTANTS):
    """Common-emitter BJT array: y_i = 1 V * exp(x_i/V_T) / sum_j exp(x_j/V_T).

    Outputs sum to 1 V by construction (the emitter current sum is fixed).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("softmax_block requires at least one input")
    z = x / c.v_thermal
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def comparator3(v1: float, v2: float, v3: float,
                c: BlockConstants = DEFAULT_CONSTANTS,
                tie_tol: float = 1e-9):
    """Three-input maximum with per-input argmax flags.

    Returns (v_max, b1, b2, b3).  Each b_i sits one diode drop above
    v_max when input i attains the maximum (ties included), else at the
    negative rail.
    """
    vmax = max(v1, v2, v3)
    hi = vmax + c.v_diode
    lo = -c.rail
    b = tuple(hi if v >= vmax - tie_tol else lo for v in (v1, v2, v3))
    return (vmax, *b)


def bidirectional_switch(v_in: float, ctrl_plus: float, ctrl_minus: float) -> float:
    """Polarity-gated pass element.

    Positive signals pass while ctrl_plus is high; negative signals
    pass while ctrl_minus is high; everything else is blocked.
    """
    if v_in >= 0.0:
        return v_in if ctrl_plus > 0.0 else 0.0
    return v_in if ctrl_minus > 0.0 else 0.0


def integrator_cell(x: float, dx: float, dt_seconds: float,
                    c: BlockConstants = DEFAULT_CONSTANTS,
                    lo: float = 0.0, hi: float = 1.0) -> float:
    """Capacitor integration stage with switch-enforced bounds.

    The transconductance over capacitance ratio fixes the time scale:
    one second of circuit time advances the equations by
    ``time_units_per_second`` units.  Bound enforcement feeds dx through
    the bidirectional switch whose controls come from window comparators
    on the capacitor voltage.
    """
    ctrl_plus = c.rail if x < hi else -c.rail
    ctrl_minus = c.rail if x > lo else -c.rail
    gated = bidirectional_switch(dx, ctrl_plus, ctrl_minus)
    x2 = x + gated * dt_seconds * c.time_units_per_second
    # the switch reacts instantaneously in this behavioral model, so a
    # step landing past the bound is projected back onto it
    return min(max(x2, lo), hi)


@dataclass(frozen=True)
class ClauseScalings:
    """Internal gains of the clause module.

    The electrical constants keep every intermediate within the rails
    for in-range inputs; the equation constants are the resistor-ratio
    gains realizing the dynamics parameters.  log_to_antilog_gain
    converts the log amp's volts-per-decade output onto the antilog
    amp's natural-log scale: antilog_scale * ln(10) / |log_gain|.
    """

    params: DmmParams = field(default_factory=DmmParams)
    volt_to_current: float = 1e-6      # log-amp input V-to-I stage, A/V
    log_to_antilog_gain: float = 0.030 * math.log(10.0) / 0.375

    def xl_volts(self, xl: float, c: BlockConstants = DEFAULT_CONSTANTS) -> float:
        return xl * c.antilog_scale


def _longterm_branch(level: float, xl: float, s: ClauseScalings,
                     c: BlockConstants) -> float:
    # exp(log(level) - xl) realized as log amp -> gain -> adder -> antilog
    v_log = log_amp(level * s.volt_to_current / 1.0, c)
    v_nat = multiplier(v_log, s.log_to_antilog_gain, c)
    v_sum = adder(v_nat, s.xl_volts(xl, c), c)
    return antilog_amp(v_sum, c) / c.antilog_scale


def clause_module(v1: float, v2: float, v3: float, xs: float,
                  c: BlockConstants = DEFAULT_CONSTANTS,
                  s: ClauseScalings | None = None,
                  xl: float = 0.0):
    """Behavioral composition of the per-clause derivative module.

    Inputs are the three literal voltages (negation happens upstream in
    the variable modules, so all three are already oriented) and the
    clause's short-term memory.  Outputs:

      dxs      - short-term memory derivative
      dxl      - long-term derivative through the log-sum-exp channel,
                 evaluated at the given xl (0 by default)
      dv1_pre  - per-literal xs*G + zeta*(1-xs)*R, the part that feeds
                 the softmax-weighted gain stage
      dv2      - per-literal (1-xs)*R, added downstream without weight

    The caller applies literal polarity, the softmax weight, and the
    3000x transconductance ratio when wiring variable modules together.
    """
    if s is None:
        s = ClauseScalings()
    p = s.params
    for name, val in (("v1", v1), ("v2", v2), ("v3", v3), ("xs", xs)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name} out of range [0, 1]: {val}")

    vmax, b1, b2, b3 = comparator3(v1, v2, v3, c, p.tie_tol)
    cm = subtractor(1.0, vmax, c)

    # short-term channel: beta * (xs + eps) * (C - gamma).  The product
    # stays inside the rails; beta is the output current source's
    # transconductance gain, so it never appears as a voltage.
    drive = adder(xs, p.epsilon, c)
    gap = subtractor(cm, p.gamma, c)
    dxs = p.beta * multiplier(drive, gap, c)

    # long-term channel, kept in log space until the final difference
    pos = _longterm_branch(cm + p.lambda_shift, xl, s, c)
    neg = _longterm_branch(p.delta + p.lambda_shift, xl, s, c)
    dxl = multiplier(subtractor(pos, neg, c), p.alpha, c)

    one_minus_xs = subtractor(1.0, xs, c)
    dv1 = []
    dv2 = []
    for b in (b1, b2, b3):
        g = cm
        r = bidirectional_switch(cm, b, b)
        hold = multiplier(one_minus_xs, r, c)
        dv1.append(adder(multiplier(xs, g, c), multiplier(p.zeta, hold, c), c))
        dv2.append(hold)
    return dxs, dxl, tuple(dv1), tuple(dv2)


_BLOCK_ARITY = {
    "adder": 2,
    "subtractor": 2,
    "multiplier": 2,
    "log": 1,
    "antilog": 1,
    "switch": 3,
    "const": 0,
}


class BlockGraph:
    """A wired set of blocks evaluated as a combinational circuit.

    Built from the line-oriented description format:

        block <id> <kind> [param]
        wire <src-id> <dst-id>.<port>
        in <name> <dst-id>.<port>
        out <name> <src-id>

    Ports are a/b/c in input order.  Kinds: adder, subtractor,
    multiplier, log, antilog, switch, const (const takes its value as
    the param).  The graph must be acyclic; every input port must be
    driven exactly once.
    """

    def __init__(self, blocks, wires, inputs, outputs,
                 constants: BlockConstants = DEFAULT_CONSTANTS):
        self.blocks = blocks      # id -> (kind, param)
        self.wires = wires        # (dst_id, port) -> src  where src is ("block", id) or ("in", name)
        self.inputs = inputs      # name -> (dst_id, port), possibly several via wires
        self.outputs = outputs    # name -> block id
        self.constants = constants
        self._order = self._toposort()

    def _deps(self, bid):
        kind, _ = self.blocks[bid]
        out = []
        for port in "abc"[: _BLOCK_ARITY[kind]]:
            src = self.wires.get((bid, port))
            if src is None:
                raise ValueError(f"block {bid}: port {port} not driven")
            if src[0] == "block":
                out.append(src[1])
        return out

    def _toposort(self):
        state = {}
        order = []

        def visit(bid):
            st = state.get(bid)
            if st == 1:
                raise ValueError(f"cycle through block {bid}")
            if st == 2:
                return
            state[bid] = 1
            for dep in self._deps(bid):
                visit(dep)
            state[bid] = 2
            order.append(bid)

        for bid in self.blocks:
            visit(bid)
        return order

    def evaluate(self, **in_values):
        """Evaluate all outputs for the given named input voltages."""
        vals = {}
        c = self.constants
        for bid in self._order:
            kind, param = self.blocks[bid]
            args = []
            for port in "abc"[: _BLOCK_ARITY[kind]]:
                src = self.wires[(bid, port)]
                if src[0] == "block":
                    args.append(vals[src[1]])
                else:
                    if src[1] not in in_values:
                        raise ValueError(f"missing input: {src[1]}")
                    args.append(in_values[src[1]])
            if kind == "adder":
                vals[bid] = adder(args[0], args[1], c)
            elif kind == "subtractor":
                vals[bid] = subtractor(args[0], args[1], c)
            elif kind == "multiplier":
                vals[bid] = multiplier(args[0], args[1], c)
            elif kind == "log":
                vals[bid] = log_amp(args[0], c)
            elif kind == "antilog":
                vals[bid] = antilog_amp(args[0], c)
            elif kind == "switch":
                vals[bid] = bidirectional_switch(args[0], args[1], args[2])
            elif kind == "const":
                vals[bid] = _clip(param, c)
            else:
                raise ValueError(f"unknown block kind: {kind}")
        return {name: vals[bid] for name, bid in self.outputs.items()}


def parse_block_graph(text: str,
                      constants: BlockConstants = DEFAULT_CONSTANTS) -> BlockGraph:
    """Parse the line-oriented block graph description."""
    blocks = {}
    wires = {}
    inputs = {}
    outputs = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "block":
                _, bid, kind = tok[:3]
                if kind not in _BLOCK_ARITY:
                    raise ValueError(f"unknown kind {kind}")
                if bid in blocks:
                    raise ValueError(f"duplicate block id {bid}")
                param = float(tok[3]) if len(tok) > 3 else 0.0
                blocks[bid] = (kind, param)
            elif tok[0] == "wire":
                _, src, dst = tok[:3]
                dbid, port = dst.split(".")
                if (dbid, port) in wires:
                    raise ValueError(f"port {dst} driven twice")
                wires[(dbid, port)] = ("block", src)
            elif tok[0] == "in":
                _, name, dst = tok[:3]
                dbid, port = dst.split(".")
                if (dbid, port) in wires:
                    raise ValueError(f"port {dst} driven twice")
                wires[(dbid, port)] = ("in", name)
                inputs[name] = (dbid, port)
            elif tok[0] == "out":
                _, name, src = tok[:3]
                outputs[name] = src
            else:
                raise ValueError(f"unknown directive {tok[0]}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {ln}: {raw.strip()!r}: {exc}") from None
    for (dbid, port) in wires:
        if dbid not in blocks:
            raise ValueError(f"wire to unknown block {dbid}")
    for name, bid in outputs.items():
        if bid not in blocks:
            raise ValueError(f"output {name} from unknown block {bid}")
    return BlockGraph(blocks, wires, inputs, outputs, constants)
