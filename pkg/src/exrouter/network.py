"""Sender / wire / receiver topology and its single-particle coupling matrix.

Global site numbering (0-based) puts the sender pair first, the wire next and
the receiver blocks last, with the target receiver occupying the two final
indices. A receiver block ``(r, r + 1)`` is attached to the wire through its
first site ``r``; the sender is attached through its second site.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import NoActiveReceiver, ValidationError


class Mode(str, enum.Enum):
    SWITCHABLE = "switchable"
    PERMANENT = "permanent"


@dataclass(frozen=True)
class ReceiverSpec:
    contact: int
    J_r: float = 1.0
    active: bool = True


@dataclass(frozen=True)
class NetworkSpec:
    """Declarative description of a routing network.

    Contact points (``sender_contact`` and ``ReceiverSpec.contact``) use
    wire-internal numbering ``1..n_w``.
    """

    n_w: int
    J: float = 1.0
    J_s: float = 1.0
    J0: float = 0.01
    receivers: tuple[ReceiverSpec, ...] = ()
    mode: Mode = Mode.SWITCHABLE
    sender_contact: int = 1

    def __post_init__(self):
        object.__setattr__(self, "receivers", tuple(self.receivers))
        object.__setattr__(self, "mode", Mode(self.mode))

    @classmethod
    def chain(cls, n_w, contact=None, **kw):
        """One active receiver at ``contact`` (default: far edge of the wire)."""
        J_r = kw.pop("J_r", kw.get("J_s", 1.0))
        contact = n_w if contact is None else contact
        return cls(n_w=n_w, receivers=(ReceiverSpec(contact, J_r, True),), **kw)

    def coupled_receivers(self) -> list[int]:
        """Indices of receivers whose wire link is on."""
        if self.mode is Mode.PERMANENT:
            return list(range(len(self.receivers)))
        return [i for i, r in enumerate(self.receivers) if r.active]

    def default_target(self) -> int:
        coupled = self.coupled_receivers()
        if not coupled:
            raise NoActiveReceiver("no receiver block is coupled to the wire")
        return coupled[-1]

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        d["receivers"] = [asdict(r) for r in self.receivers]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkSpec":
        allowed = {"n_w", "J", "J_s", "J0", "sender_contact", "mode", "receivers"}
        unknown = set(d) - allowed
        if unknown:
            raise ValidationError([f"unknown key(s): {sorted(unknown)}"])
        if "n_w" not in d:
            raise ValidationError(["missing key: n_w"])
        receivers = []
        for r in d.get("receivers", []):
            if not isinstance(r, dict):
                raise ValidationError(["receiver entries must be objects"])
            extra = set(r) - {"contact", "J_r", "active"}
            if extra:
                raise ValidationError([f"unknown receiver key(s): {sorted(extra)}"])
            if "contact" not in r:
                raise ValidationError(["receiver missing key: contact"])
            receivers.append(
                ReceiverSpec(
                    contact=_as_int(r["contact"], "contact"),
                    J_r=float(r.get("J_r", 1.0)),
                    active=bool(r.get("active", True)),
                )
            )
        try:
            mode = Mode(d.get("mode", "switchable"))
        except ValueError:
            raise ValidationError([f"unknown mode {d.get('mode')!r}"]) from None
        return cls(
            n_w=_as_int(d["n_w"], "n_w"),
            J=float(d.get("J", 1.0)),
            J_s=float(d.get("J_s", 1.0)),
            J0=float(d.get("J0", 0.01)),
            receivers=tuple(receivers),
            mode=mode,
            sender_contact=_as_int(d.get("sender_contact", 1), "sender_contact"),
        )

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "NetworkSpec":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "NetworkSpec":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _as_int(value, name):
    if isinstance(value, bool) or not float(value).is_integer():
        raise ValidationError([f"{name} must be an integer, got {value!r}"])
    return int(value)


@dataclass(frozen=True)
class SiteIndexMap:
    """Bijection between block-local labels and 0-based global site indices."""

    n_w: int
    receiver_order: tuple[int, ...]  # receiver indices, target last
    total_sites: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total_sites", self.n_w + 2 + 2 * len(self.receiver_order))

    def global_of_sender(self, i: int) -> int:
        if i not in (1, 2):
            raise IndexError(f"sender site must be 1 or 2, got {i}")
        return i - 1

    def global_of_wire(self, m: int) -> int:
        if not 1 <= m <= self.n_w:
            raise IndexError(f"wire site {m} outside 1..{self.n_w}")
        return 1 + m

    def global_of_receiver(self, block: int, i: int) -> int:
        if i not in (1, 2):
            raise IndexError(f"receiver site must be 1 or 2, got {i}")
        slot = self.receiver_order.index(block)
        return self.n_w + 2 + 2 * slot + (i - 1)

    @property
    def sender_sites(self) -> tuple[int, int]:
        return (0, 1)

    @property
    def target_sites(self) -> tuple[int, int]:
        return (self.total_sites - 2, self.total_sites - 1)

    def all_indices(self) -> list[int]:
        out = [self.global_of_sender(1), self.global_of_sender(2)]
        out += [self.global_of_wire(m) for m in range(1, self.n_w + 1)]
        for b in self.receiver_order:
            out += [self.global_of_receiver(b, 1), self.global_of_receiver(b, 2)]
        return out


def validate(spec: NetworkSpec) -> list[str]:
    """Return the list of invariant violations; empty means valid."""
    problems = []
    if not isinstance(spec.n_w, int) or spec.n_w < 2:
        problems.append(f"n_w must be an integer >= 2, got {spec.n_w!r}")
        return problems
    couplings = {"J": spec.J, "J_s": spec.J_s, "J0": spec.J0}
    couplings.update({f"receivers[{i}].J_r": r.J_r for i, r in enumerate(spec.receivers)})
    for name, value in couplings.items():
        if not math.isfinite(value):
            problems.append(f"{name} is not finite")
    if math.isfinite(spec.J0) and spec.J0 <= 0:
        problems.append("J0 must be > 0")
    if not 1 <= spec.sender_contact <= spec.n_w:
        problems.append(f"sender contact {spec.sender_contact} out of range 1..{spec.n_w}")
    for i, r in enumerate(spec.receivers):
        if not 1 <= r.contact <= spec.n_w:
            problems.append(f"receivers[{i}]: contact out of range ({r.contact} not in 1..{spec.n_w})")
    if spec.mode is Mode.SWITCHABLE and sum(r.active for r in spec.receivers) > 1:
        problems.append("switchable mode allows at most one active receiver")
    seen = {}
    for i in spec.coupled_receivers():
        c = spec.receivers[i].contact
        if c in seen:
            problems.append(f"shared contact point {c} (receivers {seen[c]} and {i})")
        seen.setdefault(c, i)
    return problems


def check(spec: NetworkSpec) -> NetworkSpec:
    problems = validate(spec)
    if problems:
        raise ValidationError(problems)
    return spec


def active_subnetwork(spec: NetworkSpec) -> NetworkSpec:
    """Drop receiver blocks whose wire link is switched off.

    Permanent-mode specs are returned unchanged.
    """
    check(spec)
    if spec.mode is Mode.PERMANENT:
        return spec
    active = tuple(r for r in spec.receivers if r.active)
    if not active:
        raise NoActiveReceiver("switchable network has no active receiver")
    if active == spec.receivers:
        return spec
    return replace(spec, receivers=active)


def site_map(spec: NetworkSpec, target: int | None = None) -> SiteIndexMap:
    """Site numbering for ``spec`` as given (idle blocks included)."""
    n = len(spec.receivers)
    if target is None:
        target = spec.default_target() if spec.coupled_receivers() else n - 1
    if n and not 0 <= target < n:
        raise IndexError(f"target receiver {target} out of range")
    order = tuple(i for i in range(n) if i != target) + ((target,) if n else ())
    return SiteIndexMap(spec.n_w, order)


def to_adjacency(spec: NetworkSpec, target: int | None = None) -> np.ndarray:
    """Single-particle coupling matrix of the active network.

    ``target`` indexes ``spec.receivers``; that block is placed on the last two
    global sites. Switched-off blocks are removed before numbering.
    """
    check(spec)
    if spec.mode is Mode.SWITCHABLE and spec.receivers:
        if target is not None and not spec.receivers[target].active:
            raise NoActiveReceiver(f"receiver {target} is switched off")
        sub = active_subnetwork(spec)
        if target is not None:
            target = sum(r.active for r in spec.receivers[:target])
        spec = sub
    smap = site_map(spec, target)
    N = smap.total_sites
    M = np.zeros((N, N))

    def link(i, j, value):
        M[i, j] = M[j, i] = value

    link(smap.global_of_sender(1), smap.global_of_sender(2), spec.J_s)
    for m in range(1, spec.n_w):
        link(smap.global_of_wire(m), smap.global_of_wire(m + 1), spec.J)
    link(smap.global_of_sender(2), smap.global_of_wire(spec.sender_contact), spec.J0)
    for b in smap.receiver_order:
        r = spec.receivers[b]
        r1 = smap.global_of_receiver(b, 1)
        link(r1, smap.global_of_receiver(b, 2), r.J_r)
        link(r1, smap.global_of_wire(r.contact), spec.J0)
    return M
