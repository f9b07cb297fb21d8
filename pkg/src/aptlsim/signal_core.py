"""Three-valued, strength-annotated signal lattice and the dual-gate
ambipolar FET conduction rules.

Everything here is an immutable value or a pure function; the rest of the
package (netlist, engine, generators) is built on top of these rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable


class Level(IntEnum):
    """Logic level carried on a node: zero, one, or unknown."""

    L0 = 0
    L1 = 1
    LX = 2

    def __repr__(self):
        return self.name


class Strength(IntEnum):
    """Drive strength, totally ordered.

    WEAK is a full level degraded by a threshold-voltage drop through an
    unfavourable channel; CHARGED is a level retained on an undriven node.
    """

    FLOATING = 0
    CHARGED = 1
    WEAK = 2
    STRONG = 3

    def __repr__(self):
        return self.name


class Polarity(IntEnum):
    """Channel carrier type selected by the polarity gate."""

    NTYPE = 0
    PTYPE = 1
    UNKNOWN = 2

    def __repr__(self):
        return self.name


class Conduction(IntEnum):
    OFF = 0
    ON = 1
    MAYBE = 2

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Signal:
    """A (level, strength) pair.

    Invariant: a FLOATING signal carries no level information, so its level
    is forced to LX.
    """

    level: Level
    strength: Strength

    def __post_init__(self):
        if self.strength == Strength.FLOATING and self.level != Level.LX:
            raise ValueError("floating signal must carry level LX")

    def __repr__(self):
        return f"Signal({self.level.name}, {self.strength.name})"


FLOATING = Signal(Level.LX, Strength.FLOATING)


def channel_polarity(pg: Level) -> Polarity:
    """Polarity selected by the polarity-gate level.

    PG high selects an n-type channel, PG low a p-type channel. This fixed
    convention makes a single device with CG=a, PG=b conduct exactly when
    a XNOR b is true.
    """
    if pg == Level.L1:
        return Polarity.NTYPE
    if pg == Level.L0:
        return Polarity.PTYPE
    return Polarity.UNKNOWN


def conduction(polarity: Polarity, cg: Level) -> Conduction:
    """Whether the channel conducts for a given control-gate level.

    An n-type channel turns on with CG high, a p-type with CG low. Any
    unknown gate or unknown polarity is pessimistically MAYBE.
    """
    if polarity == Polarity.UNKNOWN or cg == Level.LX:
        return Conduction.MAYBE
    if polarity == Polarity.NTYPE:
        return Conduction.ON if cg == Level.L1 else Conduction.OFF
    return Conduction.ON if cg == Level.L0 else Conduction.OFF


def pass_cap(polarity: Polarity, level: Level) -> Strength:
    """Maximum strength a channel of the given polarity can pass for a level.

    An n-type channel passes a zero at full strength but degrades a one to
    WEAK (threshold drop); p-type is the mirror image. Unknown level or
    polarity caps at WEAK.
    """
    if level == Level.LX or polarity == Polarity.UNKNOWN:
        return Strength.WEAK
    if polarity == Polarity.NTYPE:
        return Strength.STRONG if level == Level.L0 else Strength.WEAK
    return Strength.STRONG if level == Level.L1 else Strength.WEAK


def pass_signal(polarity: Polarity, signal: Signal,
                cond: Conduction = Conduction.ON) -> Signal:
    """Signal seen on the far side of a conducting channel.

    Strength composes by min with the polarity/level cap, so a degraded
    signal is never restored by a further pass. A MAYBE-conducting device
    contributes the unknown level at the normal pass strength.
    """
    cap = pass_cap(polarity, signal.level)
    strength = Strength(min(signal.strength, cap))
    level = Level.LX if cond == Conduction.MAYBE else signal.level
    if strength == Strength.FLOATING:
        level = Level.LX
    return Signal(level, strength)


def resolve2(a: Signal, b: Signal) -> Signal:
    """Resolve two contributions: higher strength wins; an equal-strength
    level conflict yields LX at that strength."""
    if a.strength > b.strength:
        return a
    if b.strength > a.strength:
        return b
    if a.level == b.level:
        return a
    return Signal(Level.LX, a.strength)


def resolve(contributions: Iterable[Signal]) -> Signal:
    """Resolve any number of contributions to a node.

    The empty set resolves to a floating unknown. The result is independent
    of ordering (resolve2 is commutative, associative and idempotent).
    """
    acc = FLOATING
    for sig in contributions:
        acc = resolve2(acc, sig)
    return acc
