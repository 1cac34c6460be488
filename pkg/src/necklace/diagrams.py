"""Planar disc-cluster diagrams: construction, enumeration, evaluation.

A diagram is a tree of discs joined by internal wires, drawn in a marked
outer disc. Each inner disc is filled with a component of a multilinear map;
each wire feeds one disc's output into another disc's input slot. The outer
boundary walk determines the composite component the diagram contributes to,
and evaluation routes basis arrows through the discs with Koszul signs from
the central sign engine.

Conventions fixed here (they are validated by the identity suites in the
bracket modules, which are the oracle for every sign):

* Boundary walk of a disc with groups g_0..g_{n-1} and outputs o_0..o_{n-1}:
  arc(g_0), o_{n-1}, arc(g_{n-1}), o_{n-2}, ..., arc(g_1), o_0, cyclically,
  where arc(g) lists the group's objects ascending with input slots between.
* Splicing a wire: the consumed port item is replaced by the partner's walk
  opened at its matching port; boundary objects adjacent to the wire are
  identified (and must agree once object maps are applied).
* Marks: a marked diagram anchors composite group 0 at the start of one
  disc's group 0, which requires that disc's output 0 to be unconsumed.
  Every other disc is attached in pinned alignment (fed input slots lie in
  the disc's group 0; consumed outputs are output 0), so each distinct
  alignment datum is enumerated exactly once.
* Evaluation straightens a token list: discs fire in dependency order; each
  firing moves its input tokens together (Koszul sign), pays the operator
  parity against the prefix, and splices in its output tokens. A final
  reordering matches the composite output order.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Sequence

from .quivers import (
    ArgumentError,
    MultiMap,
    PCYElement,
    TruncationError,
    multi_num_inputs,
    multi_output_ends,
)
from .signs import reorder_sign, sign_pow

OBJ = "obj"
SLOT = "slot"
OUT = "out"


# ---------------------------------------------------------------------------
# Filling adapters: uniform view of MultiMap / PCYElement as disc fillings
# ---------------------------------------------------------------------------


def filling_keys(elem) -> list:
    """Stored component keys as multi-tuples (single-output maps wrapped)."""
    if isinstance(elem, MultiMap):
        return [(x,) for x in sorted(elem.components)]
    return sorted(elem.components)


def filling_entries(elem, key) -> list:
    """Sorted (ins, outs, coeff) entries at a multi-tuple key; outs a tuple."""
    if isinstance(elem, MultiMap):
        if len(key) != 1:
            return []
        comp = elem.component(key[0])
        return [
            (ins, (out,), coeff)
            for ins in sorted(comp)
            for out, coeff in sorted(comp[ins].items())
        ]
    comp = elem.component(tuple(key))
    return [
        (ins, outs, coeff)
        for ins in sorted(comp)
        for outs, coeff in sorted(comp[ins].items())
    ]


def token_parity(elem, key) -> int:
    """Parity shift the disc applies to a token list (mod 2 is what matters).

    A multi-output element moves as one suspended package, so its Koszul
    parity is the intrinsic degree regardless of how many output factors
    the component has.
    """
    if isinstance(elem, MultiMap):
        return elem.intrinsic_degree + elem.out_shift - 1
    return elem.intrinsic_degree


def filling_out_ends(elem, key, i: int) -> tuple:
    return multi_output_ends(tuple(key), elem.object_map, i)


def filling_slot_ends(elem, key, g: int, s: int) -> tuple:
    group = key[g]
    return (group[s + 1], group[s])


def filling_num_outs(key) -> int:
    return len(key)


def filling_num_slots(key) -> int:
    return multi_num_inputs(tuple(key))


# ---------------------------------------------------------------------------
# Walk construction
# ---------------------------------------------------------------------------


def disc_cycle(disc: int, key) -> list:
    """Cyclic boundary item list of one disc: objects, slots, outputs."""

    def arc(g: int) -> list:
        group = key[g]
        items = [(OBJ, group[0])]
        for s in range(len(group) - 1):
            items.append((SLOT, disc, g, s))
            items.append((OBJ, group[s + 1]))
        return items

    n = len(key)
    items = arc(0)
    items.append((OUT, disc, n - 1))
    for g in range(n - 1, 0, -1):
        items.extend(arc(g))
        items.append((OUT, disc, g - 1))
    return items


class Wire:
    __slots__ = ("feeder", "out_idx", "receiver", "group", "slot")

    def __init__(self, feeder: int, out_idx: int, receiver: int, group: int, slot: int):
        self.feeder = feeder
        self.out_idx = out_idx
        self.receiver = receiver
        self.group = group
        self.slot = slot

    def as_tuple(self) -> tuple:
        return (self.feeder, self.out_idx, self.receiver, self.group, self.slot)

    def __repr__(self) -> str:
        return f"Wire(d{self.feeder}.o{self.out_idx} -> d{self.receiver}[{self.group},{self.slot}])"


def _render(disc: int, opened_at, keys, by_out, by_slot, visited) -> Optional[list]:
    """Boundary items contributed by `disc` and everything hanging off it.

    `opened_at` is the port item of this disc consumed by its parent (None
    for the root, which is rendered cyclically). Host objects adjacent to a
    wired port are dropped; the partner's opened walk supplies the
    identified objects instead.
    """
    if disc in visited:
        raise ArgumentError("diagram wiring contains a cycle")
    visited.add(disc)
    items = disc_cycle(disc, keys[disc])
    if opened_at is not None:
        idx = items.index(opened_at)
        items = items[idx + 1:] + items[:idx]
    cyclic = opened_at is None
    n = len(items)

    def wired(item):
        if item[0] == SLOT:
            return by_slot.get((item[1], item[2], item[3]))
        if item[0] == OUT:
            return by_out.get((item[1], item[2]))
        return None

    deleted = set()
    for i, item in enumerate(items):
        if wired(item) is not None:
            for j in (i - 1, i + 1):
                if cyclic:
                    deleted.add(j % n)
                elif 0 <= j < n:
                    deleted.add(j)
    out: list = []
    for i, item in enumerate(items):
        link = wired(item)
        if link is not None:
            partner_disc, partner_item = link
            sub = _render(partner_disc, partner_item, keys, by_out, by_slot, visited)
            if sub is None:
                return None
            out.extend(sub)
        elif i in deleted:
            if item[0] != OBJ:
                raise ArgumentError("two wires share a port")
            continue
        else:
            out.append(item)
    return out


def _merge_objects(walk: list) -> Optional[list]:
    """Collapse cyclic runs of adjacent boundary objects, requiring equality.

    Returns None when two identified boundary objects disagree (the
    candidate diagram does not type-check and contributes nothing).
    """
    if not walk:
        return None
    n = len(walk)
    start = next((i for i, it in enumerate(walk) if it[0] != OBJ), None)
    if start is None:
        return None
    merged: list = []
    run: list = []

    def flush() -> bool:
        nonlocal run
        if run:
            labels = {it[1] for it in run}
            if len(labels) != 1:
                return False
            merged.append(run[0])
            run = []
        return True

    for k in range(n):
        item = walk[(start + 1 + k) % n]
        if item[0] == OBJ:
            run.append(item)
        else:
            if not flush():
                return None
            merged.append(item)
    if not flush():
        return None
    return merged


class Diagram:
    """One marked, filled diagram with its composite boundary data.

    discs: tuple of (label, key); wires: tuple of Wire tuples;
    composite_key: the multi-tuple the diagram contributes to;
    slot_map[k] = (disc, group, slot) feeding composite input k;
    out_map[i] = (disc, out_idx) producing composite output i;
    order: disc firing order (feeders before receivers);
    base_point: (disc, boundary rank) of the mark.
    """

    __slots__ = (
        "shape",
        "discs",
        "wires",
        "composite_key",
        "slot_map",
        "out_map",
        "order",
        "base_point",
    )

    def __init__(self, shape, discs, wires, composite_key, slot_map, out_map, order, base_point):
        self.shape = shape
        self.discs = tuple(discs)
        self.wires = tuple(wires)
        self.composite_key = composite_key
        self.slot_map = tuple(slot_map)
        self.out_map = tuple(out_map)
        self.order = tuple(order)
        self.base_point = base_point

    # spec-facing views -----------------------------------------------------

    def disc_signature(self) -> list:
        return [
            (label, filling_num_slots(key), filling_num_outs(key))
            for label, key in self.discs
        ]

    def internal_arrows(self) -> list:
        return [((w[0], w[1]), (w[2], w[3], w[4])) for w in self.wires]

    def external_inputs(self) -> list:
        result = []
        for k, (d, g, s) in enumerate(self.slot_map):
            key = self.discs[d][1]
            result.append((d, (g, s), (key[g][s + 1], key[g][s])))
        return result

    def external_outputs(self) -> list:
        return [(d, i) for d, i in self.out_map]

    def identity_tuple(self) -> tuple:
        return (
            self.shape,
            self.discs,
            self.wires,
            self.composite_key,
            self.slot_map,
            self.out_map,
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, Diagram) and self.identity_tuple() == other.identity_tuple()

    def __hash__(self) -> int:
        return hash(self.identity_tuple())

    def __repr__(self) -> str:
        return f"Diagram({self.shape}, {len(self.discs)} discs, type={self.composite_key})"

    def to_text(self) -> str:
        lines = [f"shape {self.shape}", f"type {self.composite_key}"]
        for i, (label, key) in enumerate(self.discs):
            lines.append(f"disc {i}: {label} key={key}")
        for w in self.wires:
            lines.append(f"wire: d{w[0]}.out{w[1]} -> d{w[2]}[{w[3]},{w[4]}]")
        lines.append(f"order {list(self.order)}")
        lines.append(f"mark d{self.base_point[0]}")
        return "\n".join(lines)

    def to_dot(self) -> str:
        lines = ["digraph diagram {"]
        for i, (label, key) in enumerate(self.discs):
            lines.append(f'  d{i} [label="{label}"];')
        for w in self.wires:
            lines.append(f"  d{w[0]} -> d{w[2]};")
        lines.append("}")
        return "\n".join(lines)


def assemble_diagram(
    shape: str,
    disc_data: Sequence,
    wires: Sequence[Wire],
    mark_disc: int,
    fillings: Optional[Mapping] = None,
):
    """Build the marked Diagram for a wired disc cluster, or None.

    disc_data: list of (label, key). The mark sits at the start of
    mark_disc's group 0, which requires that disc's output 0 to be free.
    Returns None when boundary objects fail to match. Passing fillings
    (label -> element) lets the wires be checked end-to-end, since output
    endpoints depend on the feeder's object map.
    """
    keys = [key for _, key in disc_data]
    if fillings is not None:
        for w in wires:
            feeder = fillings[disc_data[w.feeder][0]]
            receiver = fillings[disc_data[w.receiver][0]]
            if not _ends_match(
                feeder, keys[w.feeder], w.out_idx,
                receiver, keys[w.receiver], w.group, w.slot,
            ):
                return None
    by_out = {}
    by_slot = {}
    for w in wires:
        by_out[(w.feeder, w.out_idx)] = (w.receiver, (SLOT, w.receiver, w.group, w.slot))
        by_slot[(w.receiver, w.group, w.slot)] = (w.feeder, (OUT, w.feeder, w.out_idx))
    if (mark_disc, 0) in by_out:
        return None
    visited: set = set()
    walk = _render(mark_disc, None, keys, by_out, by_slot, visited)
    if walk is None:
        return None
    if len(visited) != len(disc_data):
        raise ArgumentError("diagram is not connected")
    walk = _merge_objects(walk)
    if walk is None:
        return None

    # Rotate so the walk starts at the mark: the object right after the mark
    # disc's output 0 item (which is unwired, hence present).
    anchor_out = (OUT, mark_disc, 0)
    pos = walk.index(anchor_out)
    walk = walk[pos + 1:] + walk[:pos + 1]

    # Read off the composite type. Walk order after an n-output composite:
    # group 0, out n-1, group n-1, out n-2, ..., group 1, out 0.
    segments: list = [[]]
    outs_in_walk: list = []
    for item in walk:
        if item[0] == OUT:
            outs_in_walk.append((item[1], item[2]))
            segments.append([])
        else:
            segments[-1].append(item)
    if segments[-1]:
        return None  # walk must end on an output item
    segments.pop()
    n = len(outs_in_walk)
    if n == 0 or len(segments) != n:
        return None

    group_of_segment = [0] + [n - t for t in range(1, n)]
    groups: list = [None] * n
    slot_items: list = [None] * n
    for t, seg in enumerate(segments):
        objs = tuple(it[1] for it in seg if it[0] == OBJ)
        slots = [(it[1], it[2], it[3]) for it in seg if it[0] == SLOT]
        if not objs:
            return None
        groups[group_of_segment[t]] = objs
        slot_items[group_of_segment[t]] = slots
    composite_key = tuple(groups)

    out_map: list = [None] * n
    for t, ref in enumerate(outs_in_walk):
        out_map[n - 1 - t] = ref

    slot_map: list = []
    for g in range(n):
        slot_map.extend(slot_items[g])

    # Firing order: feeders before receivers, ties by disc index.
    children = {i: [] for i in range(len(disc_data))}
    indeg = {i: 0 for i in range(len(disc_data))}
    for w in wires:
        children[w.feeder].append(w.receiver)
        indeg[w.receiver] += 1
    ready = sorted(i for i, dgr in indeg.items() if dgr == 0)
    order: list = []
    while ready:
        cur = ready.pop(0)
        order.append(cur)
        for child in children[cur]:
            indeg[child] -= 1
            if indeg[child] == 0:
                ready.append(child)
        ready.sort()
    if len(order) != len(disc_data):
        raise ArgumentError("wiring is cyclic")

    return Diagram(
        shape,
        disc_data,
        [w.as_tuple() for w in wires],
        composite_key,
        slot_map,
        out_map,
        order,
        (mark_disc, 0),
    )


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _port_list(key) -> list:
    return [
        (g, s)
        for g in range(len(key))
        for s in range(len(key[g]) - 1)
    ]


def evaluate_all(diag: Diagram, assignment: Mapping) -> dict:
    """All composite entries of one diagram: {ins: {outs: coefficient}}.

    assignment maps disc labels to MultiMap/PCYElement values. Reading a
    component beyond a filling's bounds raises TruncationError (from the
    containers); absent components inside bounds contribute zero.
    """
    n_discs = len(diag.discs)
    fillings = []
    for label, key in diag.discs:
        if label not in assignment:
            raise ArgumentError(f"no filling assigned to slot label {label}")
        fillings.append(assignment[label])

    slot_index = {ref: k for k, ref in enumerate(diag.slot_map)}
    wire_by_receiver = {}
    consumed_outs = set()
    for (fd, oi, rd, g, s) in diag.wires:
        wire_by_receiver[(rd, g, s)] = (fd, oi)
        consumed_outs.add((fd, oi))

    # Per disc: entry list and port sources.
    disc_entries = []
    port_sources = []
    for d in range(n_discs):
        label, key = diag.discs[d]
        disc_entries.append(filling_entries(fillings[d], key))
        sources = []
        for (g, s) in _port_list(key):
            if (d, g, s) in wire_by_receiver:
                sources.append(("w",) + wire_by_receiver[(d, g, s)])
            else:
                sources.append(("in", slot_index[(d, g, s)]))
        port_sources.append(sources)

    n_in = len(diag.slot_map)
    out_tokens = [("d",) + ref for ref in diag.out_map]

    results: dict = {}
    slot_names: list = [None] * n_in
    wire_names: dict = {}
    chosen: list = [None] * n_discs  # (ins, outs, coeff) per disc

    def leaf() -> None:
        ins_tuple = tuple(slot_names)
        outs_tuple = tuple(wire_names[tok] for tok in out_tokens)
        sign, scale = _straighten(diag, fillings, chosen, port_sources, wire_names, slot_names)
        if scale == 0:
            return
        bucket = results.setdefault(ins_tuple, {})
        new = bucket.get(outs_tuple, Fraction(0)) + sign * scale
        if new:
            bucket[outs_tuple] = new
        else:
            bucket.pop(outs_tuple, None)
            if not bucket:
                results.pop(ins_tuple, None)

    def go(step: int) -> None:
        if step == len(diag.order):
            leaf()
            return
        d = diag.order[step]
        for ins, outs, coeff in disc_entries[d]:
            ok = True
            touched: list = []
            for name, src in zip(ins, port_sources[d]):
                if src[0] == "w":
                    if wire_names.get(("d", src[1], src[2])) != name:
                        ok = False
                        break
                else:
                    slot_names[src[1]] = name
                    touched.append(src[1])
            if ok:
                for i, name in enumerate(outs):
                    wire_names[("d", d, i)] = name
                chosen[d] = (ins, outs, coeff)
                go(step + 1)
                for i in range(len(outs)):
                    wire_names.pop(("d", d, i), None)
            for k in touched:
                slot_names[k] = None
        chosen[d] = None

    go(0)
    return results


def _straighten(diag, fillings, chosen, port_sources, wire_names, slot_names):
    """Sign and coefficient product for one full entry assignment."""
    tokens = [("in", k) for k in range(len(diag.slot_map))]
    sdeg = {}
    for k, (d, g, s) in enumerate(diag.slot_map):
        name = slot_names[k]
        sdeg[("in", k)] = fillings[d].source.degree(name) - 1
    sign = 1
    scale = Fraction(1)
    for d in diag.order:
        ins, outs, coeff = chosen[d]
        scale *= coeff
        port_tokens = []
        repair = []
        for src in port_sources[d]:
            if src[0] == "w":
                tok = ("d", src[1], src[2])
                port_tokens.append(tok)
                # A feeder consumed anywhere except its leading output hands
                # over a fully shifted token; the receiving disc spends its
                # own suspension to lower it back to the once-shifted line.
                out_name = chosen[src[1]][1][src[2]]
                once = fillings[src[1]].target.degree(out_name) - 1
                if (sdeg[tok] - once) % 2 != 0:
                    repair.append(len(port_tokens) - 1)
            else:
                port_tokens.append(("in", src[1]))
        if repair and isinstance(fillings[d], MultiMap):
            raise ArgumentError("single-output disc cannot absorb a shifted wire")
        for i, name in enumerate(outs):
            if isinstance(fillings[d], MultiMap):
                sdeg[("d", d, i)] = fillings[d].target.degree(name) - 1
            elif i == 0 and not repair:
                sdeg[("d", d, i)] = fillings[d].target.degree(name) - 1
            else:
                sdeg[("d", d, i)] = fillings[d].target.degree(name) + fillings[d].d
        if port_tokens:
            pos = [tokens.index(t) for t in port_tokens]
            pos_set = set(pos)
            others = [i for i in range(len(tokens)) if i not in pos_set]
            insert_at = sum(1 for i in others if i < min(pos))
            arrangement = others[:insert_at] + pos + others[insert_at:]
            degrees = [sdeg[t] for t in tokens]
            sign *= reorder_sign(arrangement, degrees)
            prefix = sum(sdeg[tokens[i]] for i in others[:insert_at])
            parity = token_parity(fillings[d], diag.discs[d][1])
            sign *= sign_pow(parity * prefix)
            for r in repair:
                shift = fillings[d].d + 1
                if _REPAIR_MODE == "before":
                    hop = sum(sdeg[port_tokens[j]] for j in range(r))
                elif _REPAIR_MODE == "after":
                    hop = sum(sdeg[port_tokens[j]]
                              for j in range(r + 1, len(port_tokens)))
                elif _REPAIR_MODE == "prefix-before":
                    hop = prefix + sum(sdeg[port_tokens[j]] for j in range(r))
                elif _REPAIR_MODE == "prefix-after":
                    hop = prefix + sum(sdeg[port_tokens[j]]
                                       for j in range(r + 1, len(port_tokens)))
                elif _REPAIR_MODE == "before+1":
                    hop = sum(sdeg[port_tokens[j]] for j in range(r)) + shift
                elif _REPAIR_MODE == "after+1":
                    hop = sum(sdeg[port_tokens[j]]
                              for j in range(r + 1, len(port_tokens))) + shift
                elif _REPAIR_MODE == "none":
                    hop = 0
                else:
                    raise ArgumentError(f"unknown repair mode {_REPAIR_MODE}")
                sign *= sign_pow(shift * hop)
            new_tokens = [tokens[i] for i in others[:insert_at]]
            new_tokens.extend(("d", d, i) for i in range(len(outs)))
            new_tokens.extend(tokens[i] for i in others[insert_at:])
            tokens = new_tokens
        else:
            raise ArgumentError("disc with no inputs cannot fire")
    target = [("d",) + ref for ref in diag.out_map]
    if sorted(tokens) != sorted(target):
        raise ArgumentError("leftover tokens do not match composite outputs")
    positions = [tokens.index(t) for t in target]
    degrees = [sdeg[t] for t in tokens]
    sign *= reorder_sign(positions, degrees)
    return sign, scale


def evaluate_diagram(diag: Diagram, assignment: Mapping, tensor) -> dict:
    """Signed contribution of one diagram on one input basis tensor."""
    if tuple(tensor.type) != tuple(diag.composite_key) and (
        len(diag.composite_key) != 1 or tuple(tensor.type) != diag.composite_key[0]
    ):
        raise ArgumentError("tensor type does not match diagram type")
    all_entries = evaluate_all(diag, assignment)
    return dict(all_entries.get(tuple(tensor.arrows), {}))


# ---------------------------------------------------------------------------
# Shape registry and core families
# ---------------------------------------------------------------------------

SHAPE_NAMES = frozenset(
    {
        "psi-ainf",
        "borisov-phi",
        "borisov-psi",
        "necklace",
        "multinec",
        "pre",
        "pcy-compose",
        "phi-gB",
        "psi-gA",
        "barell-B",
        "barell-A",
        "transport-right-pcy",
        "transport-left-pcy",
        "htpy-to-weak",
        "boundary-m",
        "boundary-phi",
        "thm62-m",
        "thm62-phi",
    }
)

_REGISTRY: dict = {}

_REPAIR_MODE = "before"


def register_shape(name: str, enumerator) -> None:
    if name not in SHAPE_NAMES:
        raise ArgumentError(f"unknown shape class {name}")
    _REGISTRY[name] = enumerator


def enumerate_diagrams(shape: str, fillings: Mapping, out_type=None, **options) -> list:
    """All diagrams of one shape class, optionally filtered by composite type.

    fillings maps the shape's slot labels to elements whose stored supports
    drive the enumeration. The result is deterministic and duplicate-free.
    """
    if shape not in SHAPE_NAMES:
        raise ArgumentError(f"unknown shape class {shape}")
    if shape not in _REGISTRY:
        raise ArgumentError(f"shape class {shape} has no registered enumerator")
    diagrams = _REGISTRY[shape](fillings, **options)
    if out_type is not None:
        want = tuple(out_type)
        if want and not isinstance(want[0], tuple):
            want = (want,)
        diagrams = [d for d in diagrams if d.composite_key == want]
    return diagrams


def _ends_match(feeder, fkey, oi, receiver, rkey, g, s) -> bool:
    return filling_out_ends(feeder, fkey, oi) == filling_slot_ends(receiver, rkey, g, s)


def _necklace_family(fillings: Mapping) -> list:
    """Two discs, one wire: guest's output plugged into one host slot."""
    host = fillings["host"]
    guest = fillings["guest"]
    result = []
    for hkey in filling_keys(host):
        for gkey in filling_keys(guest):
            n_g = filling_num_outs(gkey)
            # Mark on the host: all host slots, guest consumed at output 0.
            for (g, s) in _port_list(hkey):
                if _ends_match(guest, gkey, 0, host, hkey, g, s):
                    diag = assemble_diagram(
                        "necklace",
                        [("host", hkey), ("guest", gkey)],
                        [Wire(1, 0, 0, g, s)],
                        mark_disc=0,
                    )
                    if diag is not None:
                        result.append(diag)
            # Mark on the guest: consumed output any q >= 1, host fed in group 0.
            for q in range(1, n_g):
                for s in range(len(hkey[0]) - 1):
                    if _ends_match(guest, gkey, q, host, hkey, 0, s):
                        diag = assemble_diagram(
                            "necklace",
                            [("host", hkey), ("guest", gkey)],
                            [Wire(1, q, 0, 0, s)],
                            mark_disc=1,
                        )
                        if diag is not None:
                            result.append(diag)
    return result


def _multinec_family(fillings: Mapping) -> list:
    """Central structure disc; each of its outputs feeds a distinct satellite.

    All center outputs are consumed, so the mark always sits on a satellite.
    The center is unmarked and its rotation is gauge: it is pinned by fixing
    the marked satellite to be the one fed by the center's output 0, so each
    geometric mark position is realised by exactly one stored center key.
    """
    center = fillings["center"]
    sat = fillings["sat"]
    sat_keys = filling_keys(sat)
    result = []
    for ckey in filling_keys(center):
        n_out = filling_num_outs(ckey)

        def choices(out_idx: int, marked: bool) -> list:
            opts = []
            for skey in sat_keys:
                ports = _port_list(skey) if marked else [
                    (0, s) for s in range(len(skey[0]) - 1)
                ]
                for (g, s) in ports:
                    if _ends_match(center, ckey, out_idx, sat, skey, g, s):
                        opts.append((skey, g, s))
            return opts

        pools = [choices(out_idx, marked=(out_idx == 0)) for out_idx in range(n_out)]
        for combo in itertools.product(*pools):
            discs = [("center", ckey)]
            wires = []
            for out_idx, (skey, g, s) in enumerate(combo):
                disc_id = len(discs)
                discs.append(("sat", skey))
                wires.append(Wire(0, out_idx, disc_id, g, s))
            diag = assemble_diagram("multinec", discs, wires, 1)
            if diag is not None:
                result.append(diag)
    return result


def _pre_family(fillings: Mapping) -> list:
    """Central structure disc with every input slot fed by a satellite."""
    center = fillings["center"]
    sat = fillings["sat"]
    sat_keys = filling_keys(sat)
    result = []
    for ckey in filling_keys(center):
        slots = _port_list(ckey)
        n_out = filling_num_outs(ckey)

        def feed_options(g: int, s: int, marked: bool) -> list:
            opts = []
            for skey in sat_keys:
                outs = range(1, filling_num_outs(skey)) if marked else (0,)
                for oi in outs:
                    if _ends_match(sat, skey, oi, center, ckey, g, s):
                        opts.append((skey, oi))
            return opts

        # Mark on the center (its output 0 is composite, always free).
        pools = [feed_options(g, s, marked=False) for (g, s) in slots]
        for combo in itertools.product(*pools):
            discs = [("center", ckey)]
            wires = []
            for (g, s), (skey, oi) in zip(slots, combo):
                disc_id = len(discs)
                discs.append(("sat", skey))
                wires.append(Wire(disc_id, oi, 0, g, s))
            diag = assemble_diagram("pre", discs, wires, 0)
            if diag is not None:
                result.append(diag)
        # Mark on one satellite. The center is unmarked here, so its rotation
        # is gauge: pin it by requiring the marked satellite to feed a group-0
        # slot, which selects one stored center key per geometric mark.
        for mark_slot in [i for i, (g, s) in enumerate(slots) if g == 0]:
            pools = [
                feed_options(g, s, marked=(idx == mark_slot))
                for idx, (g, s) in enumerate(slots)
            ]
            for combo in itertools.product(*pools):
                discs = [("center", ckey)]
                wires = []
                mark_disc = None
                for idx, ((g, s), (skey, oi)) in enumerate(zip(slots, combo)):
                    disc_id = len(discs)
                    discs.append(("sat", skey))
                    wires.append(Wire(disc_id, oi, 0, g, s))
                    if idx == mark_slot:
                        mark_disc = disc_id
                diag = assemble_diagram("pre", discs, wires, mark_disc)
                if diag is not None:
                    result.append(diag)
    return result


def _psi_ainf_family(fillings: Mapping) -> list:
    """Single-output center whose slot s is fed by the satellite labelled sat{s}.

    Unlike the pre family, each slot has its own filling label, so callers
    control exactly which element lands where. The mark sits on the center
    and the composite is the center's sole output. Only single-output keys
    participate on either side.
    """
    center = fillings["center"]
    n = 0
    while f"sat{n}" in fillings:
        n += 1
    if n == 0:
        raise ArgumentError("at least one satellite label (sat0, ...) is required")
    sats = [fillings[f"sat{i}"] for i in range(n)]
    result = []
    for ckey in filling_keys(center):
        if filling_num_outs(ckey) != 1:
            continue
        slots = _port_list(ckey)
        if len(slots) != n:
            continue
        pools = []
        for i, (g, s) in enumerate(slots):
            opts = []
            for skey in filling_keys(sats[i]):
                if filling_num_outs(skey) != 1:
                    continue
                if _ends_match(sats[i], skey, 0, center, ckey, g, s):
                    opts.append(skey)
            pools.append(opts)
        for combo in itertools.product(*pools):
            discs = [("center", ckey)]
            wires = []
            for i, ((g, s), skey) in enumerate(zip(slots, combo)):
                disc_id = len(discs)
                discs.append((f"sat{i}", skey))
                wires.append(Wire(disc_id, 0, 0, g, s))
            diag = assemble_diagram("psi-ainf", discs, wires, 0)
            if diag is not None:
                result.append(diag)
    return result


def _pcy_compose_family(fillings: Mapping, max_ins=None, max_outs=None) -> list:
    """Bipartite trees rooted at the marked up-disc.

    Every down-disc output feeds an up-disc input and every up-disc input
    is fed, so boundary inputs come from down discs and boundary outputs
    from up discs. Non-root discs attach in pinned alignment (down discs
    consumed at output 0, up discs fed in group 0); the mark sits on the
    root up-disc, whose outputs are all boundary. The family is unbounded
    in general, so a size window is required.
    """
    if max_ins is None or max_outs is None:
        raise TruncationError(
            "composition trees are unbounded; pass max_ins and max_outs"
        )
    up = fillings["up"]
    down = fillings["down"]
    up_keys = filling_keys(up)
    down_keys = filling_keys(down)
    result = []

    def grow(discs, wires, pending_slots, pending_outs, cur_ins, cur_outs):
        if cur_ins + len(pending_slots) > max_ins:
            return
        if cur_outs > max_outs:
            return
        if not pending_slots and not pending_outs:
            diag = assemble_diagram("pcy-compose", list(discs), list(wires), 0)
            if diag is not None:
                result.append(diag)
            return
        if pending_slots:
            (d, g, s) = pending_slots[0]
            rest = pending_slots[1:]
            ends = filling_slot_ends(up, discs[d][1], g, s)
            for dkey in down_keys:
                if filling_out_ends(down, dkey, 0) != ends:
                    continue
                disc_id = len(discs)
                new_outs = [(disc_id, k) for k in range(1, filling_num_outs(dkey))]
                grow(
                    discs + [("down", dkey)],
                    wires + [Wire(disc_id, 0, d, g, s)],
                    rest,
                    pending_outs + new_outs,
                    cur_ins + filling_num_slots(dkey),
                    cur_outs,
                )
            return
        (d, oi) = pending_outs[0]
        rest = pending_outs[1:]
        ends = filling_out_ends(down, discs[d][1], oi)
        for ukey in up_keys:
            for s in range(len(ukey[0]) - 1):
                if filling_slot_ends(up, ukey, 0, s) != ends:
                    continue
                disc_id = len(discs)
                new_slots = [
                    (disc_id, g2, s2)
                    for (g2, s2) in _port_list(ukey)
                    if (g2, s2) != (0, s)
                ]
                grow(
                    discs + [("up", ukey)],
                    wires + [Wire(d, oi, disc_id, 0, s)],
                    new_slots,
                    rest,
                    cur_ins,
                    cur_outs + filling_num_outs(ukey),
                )

    for root_key in up_keys:
        grow(
            [("up", root_key)],
            [],
            [(0, g, s) for (g, s) in _port_list(root_key)],
            [],
            0,
            filling_num_outs(root_key),
        )
    return result


register_shape("psi-ainf", _psi_ainf_family)
register_shape("necklace", _necklace_family)
register_shape("multinec", _multinec_family)
register_shape("pre", _pre_family)
register_shape("pcy-compose", _pcy_compose_family)
