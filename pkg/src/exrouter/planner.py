"""Routing addresses and wire contact points from first-order resonances.

A two-site block with intra-block coupling ``J_b`` has levels ``+/-J_b``; it
is resonant with the wire level ``k`` when ``J_b = 2 cos(k pi / (n_w + 1))``
(unit wire coupling). Transfer from the sender contact ``s`` to a receiver at
``w`` then needs equal mode weights ``|sin(k s pi/(n_w+1))| = |sin(k w pi/(n_w+1))|``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import IndexOutOfRange, NoResonance, OutOfBand, WrongWireFamily
from .spectral import wire_mode_component

SINE_TOL = 1e-9


@dataclass(frozen=True)
class RoutingEntry:
    k: int
    J_address: float
    contacts: tuple[int, ...]
    degenerate: bool = False


@dataclass(frozen=True)
class RoutingPlan:
    n_w: int
    sender_contact: int
    entries: tuple[RoutingEntry, ...]

    def to_dict(self) -> dict:
        return {
            "n_w": self.n_w,
            "sender_contact": self.sender_contact,
            "entries": [dict(asdict(e), contacts=list(e.contacts)) for e in self.entries],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_text(self) -> str:
        rows = [("k", "J_r", "w_i")]
        for e in self.entries:
            mark = " *" if e.degenerate else ""
            rows.append((str(e.k), f"{e.J_address:.6f}", ",".join(map(str, e.contacts)) + mark))
        widths = [max(len(r[i]) for r in rows) for i in range(3)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def level_energy(k: int, n_w: int) -> float:
    return 2.0 * math.cos(k * math.pi / (n_w + 1))


def resonant_k(J_s: float, n_w: int, tol: float = 1e-9) -> int:
    """Wire level whose energy equals the block coupling ``J_s``."""
    if n_w < 2:
        raise ValueError(f"n_w must be >= 2, got {n_w}")
    if abs(J_s) >= 2.0:
        raise OutOfBand(f"|J_s| = {abs(J_s)} lies outside the wire band (-2, 2)")
    k_real = (n_w + 1) / math.pi * math.acos(J_s / 2.0)
    for k in {math.floor(k_real), math.ceil(k_real)}:
        if 1 <= k <= n_w and abs(J_s - level_energy(k, n_w)) <= tol:
            return k
    raise NoResonance(f"no wire level of n_w={n_w} within {tol} of J_s={J_s}")


def resonant_mode_support(k: int, n_w: int, m: int) -> float:
    """Amplitude of wire level ``k`` on wire site ``m`` (0 and n_w+1 are the nodes)."""
    if not 1 <= k <= n_w:
        raise IndexOutOfRange(f"level {k} outside 1..{n_w}")
    if not 0 <= m <= n_w + 1:
        raise IndexOutOfRange(f"site {m} outside 0..{n_w + 1}")
    return float(wire_mode_component(k, n_w, m))


def allowed_contacts(k: int, n_w: int, s: int = 1) -> list[int]:
    """Wire sites whose level-``k`` weight matches the sender contact ``s``."""
    if not 1 <= k <= n_w:
        raise IndexOutOfRange(f"level {k} outside 1..{n_w}")
    if not 1 <= s <= n_w:
        raise IndexOutOfRange(f"sender contact {s} outside 1..{n_w}")
    sines = np.abs(np.sin(k * np.arange(1, n_w + 1) * np.pi / (n_w + 1)))
    ref = sines[s - 1]
    keep = (np.abs(sines - ref) <= SINE_TOL) & (sines > SINE_TOL)
    return [int(w) for w in np.flatnonzero(keep) + 1]


def _require_family(n_w):
    if n_w % 3 != 2:
        raise WrongWireFamily(f"n_w={n_w} is not of the form 3l+2")


def forbidden_contacts(n_w: int) -> list[int]:
    """Nodes of the level resonant with a unit-coupling block."""
    _require_family(n_w)
    return list(range(3, n_w + 1, 3))


def receiver_count(n_w: int) -> int:
    _require_family(n_w)
    return 2 * ((n_w - 2) // 3 + 1)


def routing_table(n_w: int, s: int = 1) -> RoutingPlan:
    """One entry per upper-half wire level ``k = 1 .. floor(n_w / 2)``."""
    if n_w < 2:
        raise ValueError(f"n_w must be >= 2, got {n_w}")
    entries = []
    for k in range(1, n_w // 2 + 1):
        contacts = tuple(allowed_contacts(k, n_w, s))
        entries.append(
            RoutingEntry(
                k=k,
                J_address=level_energy(k, n_w),
                contacts=contacts,
                degenerate=set(contacts) <= {s},
            )
        )
    return RoutingPlan(n_w, s, tuple(entries))
