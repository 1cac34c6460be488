"""Graded quivers, tuple indices, sparse multilinear maps, and t-families.

Everything downstream (brackets, compositions, boundary construction) works
on two map containers defined here:

* MultiMap — single-output multilinear components indexed by object tuples.
  Inputs are read in the shifted convention (an input arrow of degree e
  contributes e-1), the output carries a declared shift.
* PCYElement — multi-output components indexed by tuples of tuples, with d
  output shifts and one global shift folded into a single intrinsic degree.

Both are sparse dictionaries of exact rational matrix entries, validated
against a degree equation at construction time. Bounds are semantic: a
component beyond an element's bounds is *unknown*, not zero, and asking for
one raises TruncationError.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence

from .signs import ensure_scalar

ObjectId = str
TupleType = tuple  # tuple of ObjectId, length >= 1
MultiTupleType = tuple  # tuple of TupleType


class ArgumentError(ValueError):
    """Ill-typed or ill-formed inputs to an operation."""


class DegreeError(ArgumentError):
    """A matrix entry violates the component degree equation."""


class TruncationError(Exception):
    """A component beyond declared bounds was needed; its value is unknown."""


class InvarianceError(ArgumentError):
    """A map required to be cyclically invariant is not."""


# ---------------------------------------------------------------------------
# Quivers and index types
# ---------------------------------------------------------------------------


class GradedQuiver:
    """Finite object set with a finite graded basis of arrows per object pair.

    Arrows are stored by (source, target) pair; every basis arrow name is
    globally unique within the quiver so a bare name identifies its ends and
    degree.
    """

    def __init__(self, objects: Sequence[ObjectId], homs: Mapping[tuple, Sequence[tuple]]):
        self.objects = tuple(objects)
        if len(set(self.objects)) != len(self.objects):
            raise ArgumentError("duplicate object identifiers")
        obj_set = set(self.objects)
        self.homs: dict[tuple, tuple] = {}
        self._by_name: dict[str, tuple] = {}
        for (src, tgt), basis in homs.items():
            if src not in obj_set or tgt not in obj_set:
                raise ArgumentError(f"hom ({src},{tgt}) uses unknown objects")
            entries = []
            for name, degree in basis:
                if not isinstance(degree, int):
                    raise ArgumentError(f"arrow {name}: degree must be an integer")
                if name in self._by_name:
                    raise ArgumentError(f"duplicate arrow name {name}")
                self._by_name[name] = (src, tgt, degree)
                entries.append((name, degree))
            if entries:
                self.homs[(src, tgt)] = tuple(entries)

    def arrows(self, src: ObjectId, tgt: ObjectId) -> tuple:
        return self.homs.get((src, tgt), ())

    def arrow_names(self, src: ObjectId, tgt: ObjectId) -> list[str]:
        return [name for name, _ in self.arrows(src, tgt)]

    def has_arrow(self, name: str) -> bool:
        return name in self._by_name

    def degree(self, name: str) -> int:
        return self._by_name[name][2]

    def ends(self, name: str) -> tuple:
        src, tgt, _ = self._by_name[name]
        return (src, tgt)

    def all_arrow_names(self) -> list[str]:
        return list(self._by_name)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GradedQuiver)
            and self.objects == other.objects
            and self.homs == other.homs
        )

    def __repr__(self) -> str:
        return f"GradedQuiver(objects={list(self.objects)}, arrows={len(self._by_name)})"


def identity_object_map(quiver: GradedQuiver) -> dict:
    return {obj: obj for obj in quiver.objects}


def tuple_lg(x: TupleType) -> int:
    return len(x)


def tuple_lt(x: TupleType):
    return x[0]


def tuple_rt(x: TupleType):
    return x[-1]


def tuple_input_slots(x: TupleType) -> list[tuple]:
    """(source, target) of each expected input arrow of a tuple type.

    Slot s (0-based) of (x_1,...,x_k) expects an arrow x_{s+2} -> x_{s+1}.
    """
    return [(x[s + 1], x[s]) for s in range(len(x) - 1)]


def multi_total(xx: MultiTupleType) -> int:
    return sum(len(x) for x in xx)


def multi_num_inputs(xx: MultiTupleType) -> int:
    return sum(len(x) - 1 for x in xx)


def multi_input_slots(xx: MultiTupleType) -> list[list[tuple]]:
    return [tuple_input_slots(x) for x in xx]


def multi_output_ends(xx: MultiTupleType, object_map: Mapping, i: int) -> tuple:
    """(source, target) of output factor i (0-based) of a multi-tuple type.

    Output i runs from the last object of group i+1 (cyclically) to the first
    object of group i, pushed through the object map.
    """
    n = len(xx)
    nxt = xx[(i + 1) % n]
    return (object_map[tuple_rt(nxt)], object_map[tuple_lt(xx[i])])


def rotate_multi_tuple(xx: MultiTupleType, k: int) -> MultiTupleType:
    """The multi-tuple (x^{sigma^{-1}(1)},...) for the rotation sigma: i -> i+k."""
    n = len(xx)
    return tuple(xx[(i - k) % n] for i in range(n))


def all_tuple_types(quiver: GradedQuiver, max_len: int, min_len: int = 1) -> Iterator[TupleType]:
    for length in range(min_len, max_len + 1):
        for combo in itertools.product(quiver.objects, repeat=length):
            yield combo


def compositions(total: int, parts: int) -> Iterator[tuple]:
    """Ordered lists of `parts` positive integers summing to `total`."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def basis_tensors(quiver: GradedQuiver, slots: Sequence[tuple]) -> Iterator[tuple]:
    """All tuples of basis arrow names matching the given (src,tgt) slots."""
    pools = [quiver.arrow_names(src, tgt) for src, tgt in slots]
    if any(not pool for pool in pools):
        return
    yield from itertools.product(*pools)


class BasisTensor:
    """A pure tensor of named basis arrows matching a tuple or multi-tuple type."""

    __slots__ = ("type", "arrows")

    def __init__(self, type_, arrows: Sequence[str]):
        self.type = type_
        self.arrows = tuple(arrows)

    def validate(self, quiver: GradedQuiver) -> None:
        if self.type and isinstance(self.type[0], tuple):
            slots = [slot for group in multi_input_slots(self.type) for slot in group]
        else:
            slots = tuple_input_slots(self.type)
        if len(slots) != len(self.arrows):
            raise ArgumentError(
                f"tensor has {len(self.arrows)} arrows for {len(slots)} slots"
            )
        for name, (src, tgt) in zip(self.arrows, slots):
            if not quiver.has_arrow(name):
                raise ArgumentError(f"unknown arrow {name}")
            if quiver.ends(name) != (src, tgt):
                raise ArgumentError(
                    f"arrow {name} has ends {quiver.ends(name)}, slot wants {(src, tgt)}"
                )

    def __repr__(self) -> str:
        return f"BasisTensor({self.type}, {self.arrows})"


# ---------------------------------------------------------------------------
# Sparse vector helpers
# ---------------------------------------------------------------------------


def vec_add(a: dict, b: dict, coeff: Fraction = Fraction(1)) -> dict:
    out = dict(a)
    for key, val in b.items():
        new = out.get(key, Fraction(0)) + coeff * val
        if new:
            out[key] = new
        else:
            out.pop(key, None)
    return out


def vec_scale(a: dict, coeff: Fraction) -> dict:
    if not coeff:
        return {}
    return {key: coeff * val for key, val in a.items()}


# ---------------------------------------------------------------------------
# Map containers
# ---------------------------------------------------------------------------


def _normalized_components(raw) -> dict:
    comps: dict = {}
    for type_key, by_in in raw.items():
        cleaned_in: dict = {}
        for ins, by_out in by_in.items():
            cleaned_out = {}
            for outs, coeff in by_out.items():
                coeff = ensure_scalar(coeff)
                if coeff:
                    cleaned_out[outs] = coeff
            if cleaned_out:
                cleaned_in[tuple(ins)] = cleaned_out
        if cleaned_in:
            comps[type_key] = cleaned_in
    return comps


class MultiMap:
    """Sparse single-output multilinear map family indexed by tuple types.

    components[x][ins][out] = coefficient, where `ins` is the tuple of input
    arrow names in slot order and `out` a single output arrow name. Intrinsic
    degree sigma satisfies, for every entry,

        (deg(out) - out_shift) - sum(deg(in_j) - 1) = sigma.
    """

    def __init__(
        self,
        source: GradedQuiver,
        target: GradedQuiver,
        object_map: Mapping,
        components: Mapping,
        intrinsic_degree: int,
        max_arity: int,
        out_shift: int = 1,
        validate: bool = True,
    ):
        self.source = source
        self.target = target
        self.object_map = dict(object_map)
        self.intrinsic_degree = intrinsic_degree
        self.max_arity = max_arity
        self.out_shift = out_shift
        self.components = {
            key: {ins: dict(outs) for ins, outs in val.items()}
            for key, val in _normalized_components(components).items()
        }
        if validate:
            self._validate()

    # -- validation --------------------------------------------------------

    def _validate(self) -> None:
        for obj in self.source.objects:
            if self.object_map.get(obj) not in self.target.objects:
                raise ArgumentError(f"object map misses {obj}")
        for x, by_in in self.components.items():
            arity = len(x) - 1
            if arity < 1:
                raise ArgumentError(f"component type {x} has no inputs")
            if arity > self.max_arity:
                raise ArgumentError(
                    f"stored component of arity {arity} exceeds bound {self.max_arity}"
                )
            slots = tuple_input_slots(x)
            out_src = self.object_map[tuple_rt(x)]
            out_tgt = self.object_map[tuple_lt(x)]
            for ins, by_out in by_in.items():
                if len(ins) != len(slots):
                    raise ArgumentError(f"entry arity mismatch at {x}")
                in_sdeg = 0
                for name, (src, tgt) in zip(ins, slots):
                    if self.source.ends(name) != (src, tgt):
                        raise ArgumentError(f"arrow {name} does not fit slot {(src, tgt)}")
                    in_sdeg += self.source.degree(name) - 1
                for out_name, coeff in by_out.items():
                    if self.target.ends(out_name) != (out_src, out_tgt):
                        raise ArgumentError(
                            f"output {out_name} does not run {out_src}->{out_tgt}"
                        )
                    got = (self.target.degree(out_name) - self.out_shift) - in_sdeg
                    if got != self.intrinsic_degree:
                        raise DegreeError(
                            f"entry {x}:{ins}->{out_name} has degree {got}, "
                            f"declared {self.intrinsic_degree}"
                        )

    # -- access ------------------------------------------------------------

    def component(self, x: TupleType) -> dict:
        arity = len(x) - 1
        if arity > self.max_arity:
            raise TruncationError(
                f"component of arity {arity} beyond declared bound {self.max_arity}"
            )
        return self.components.get(tuple(x), {})

    def apply(self, tensor: BasisTensor) -> dict:
        """Exact image of a pure tensor: {output arrow name: coefficient}."""
        comp = self.component(tensor.type)
        row = comp.get(tensor.arrows, {})
        return dict(row)

    def entries(self) -> Iterator[tuple]:
        """Yield (type, ins, outs-as-1-tuple, coeff) uniformly."""
        for x, by_in in self.components.items():
            for ins, by_out in by_in.items():
                for out, coeff in by_out.items():
                    yield x, ins, (out,), coeff

    def support_types(self) -> list:
        return list(self.components)

    def is_zero(self) -> bool:
        return not self.components

    # -- algebra -----------------------------------------------------------

    def zero_like(self, intrinsic_degree: Optional[int] = None) -> "MultiMap":
        return MultiMap(
            self.source,
            self.target,
            self.object_map,
            {},
            self.intrinsic_degree if intrinsic_degree is None else intrinsic_degree,
            self.max_arity,
            self.out_shift,
            validate=False,
        )

    def add(self, other: "MultiMap", coeff: Fraction = Fraction(1)) -> "MultiMap":
        if (
            self.intrinsic_degree != other.intrinsic_degree
            or self.out_shift != other.out_shift
        ):
            raise ArgumentError("cannot add maps of different degree or shift")
        comps = {k: {i: dict(o) for i, o in v.items()} for k, v in self.components.items()}
        for x, by_in in other.components.items():
            dest = comps.setdefault(x, {})
            for ins, by_out in by_in.items():
                dest[ins] = vec_add(dest.get(ins, {}), by_out, coeff)
                if not dest[ins]:
                    del dest[ins]
            if not dest:
                del comps[x]
        return MultiMap(
            self.source,
            self.target,
            self.object_map,
            comps,
            self.intrinsic_degree,
            max(self.max_arity, other.max_arity),
            self.out_shift,
            validate=False,
        )

    def scale(self, coeff) -> "MultiMap":
        coeff = ensure_scalar(coeff)
        comps = {
            x: {ins: vec_scale(by_out, coeff) for ins, by_out in by_in.items()}
            for x, by_in in self.components.items()
        }
        return MultiMap(
            self.source,
            self.target,
            self.object_map,
            comps,
            self.intrinsic_degree,
            self.max_arity,
            self.out_shift,
            validate=False,
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiMap)
            and self.components == other.components
            and self.intrinsic_degree == other.intrinsic_degree
        )

    def __repr__(self) -> str:
        return (
            f"MultiMap(deg={self.intrinsic_degree}, types={len(self.components)}, "
            f"W={self.max_arity})"
        )


class PCYElement:
    """Sparse multi-output map family indexed by multi-tuple types.

    components[xx][ins][outs] = coefficient with `ins` the flat tuple of input
    arrow names (group by group) and `outs` the tuple of output arrow names in
    factor order. The intrinsic degree (with the global shift folded in)
    satisfies, for every entry,

        sum_i (deg(out_i) + d) - sum_j (deg(in_j) - 1) - (d+1) = intrinsic.
    """

    def __init__(
        self,
        source: GradedQuiver,
        target: GradedQuiver,
        object_map: Mapping,
        d: int,
        components: Mapping,
        intrinsic_degree: int,
        max_inputs: int,
        max_outputs: int,
        validate: bool = True,
    ):
        self.source = source
        self.target = target
        self.object_map = dict(object_map)
        self.d = d
        self.intrinsic_degree = intrinsic_degree
        self.max_inputs = max_inputs
        self.max_outputs = max_outputs
        self.components = {
            key: {ins: dict(outs) for ins, outs in val.items()}
            for key, val in _normalized_components(components).items()
        }
        if validate:
            self._validate()

    def _validate(self) -> None:
        for obj in self.source.objects:
            if self.object_map.get(obj) not in self.target.objects:
                raise ArgumentError(f"object map misses {obj}")
        for xx, by_in in self.components.items():
            n_out = len(xx)
            n_in = multi_num_inputs(xx)
            if n_in < 1:
                raise ArgumentError(
                    f"component type {xx} has no inputs; zero-input discs are excluded"
                )
            if n_in > self.max_inputs or n_out > self.max_outputs:
                raise ArgumentError(f"component {xx} exceeds bounds")
            slots = [s for group in multi_input_slots(xx) for s in group]
            out_ends = [
                multi_output_ends(xx, self.object_map, i) for i in range(n_out)
            ]
            for ins, by_out in by_in.items():
                if len(ins) != len(slots):
                    raise ArgumentError(f"entry arity mismatch at {xx}")
                in_sdeg = 0
                for name, (src, tgt) in zip(ins, slots):
                    if self.source.ends(name) != (src, tgt):
                        raise ArgumentError(f"arrow {name} does not fit slot {(src, tgt)}")
                    in_sdeg += self.source.degree(name) - 1
                for outs, coeff in by_out.items():
                    if len(outs) != n_out:
                        raise ArgumentError(f"output count mismatch at {xx}")
                    out_total = 0
                    for out_name, ends in zip(outs, out_ends):
                        if self.target.ends(out_name) != ends:
                            raise ArgumentError(
                                f"output {out_name} does not run {ends[0]}->{ends[1]}"
                            )
                        out_total += self.target.degree(out_name) + self.d
                    got = out_total - in_sdeg - (self.d + 1)
                    if got != self.intrinsic_degree:
                        raise DegreeError(
                            f"entry {xx}:{ins}->{outs} has degree {got}, "
                            f"declared {self.intrinsic_degree}"
                        )

    def component(self, xx: MultiTupleType) -> dict:
        if multi_num_inputs(xx) > self.max_inputs or len(xx) > self.max_outputs:
            raise TruncationError(f"component {xx} beyond declared bounds")
        return self.components.get(tuple(xx), {})

    def apply(self, tensor: BasisTensor) -> dict:
        comp = self.component(tensor.type)
        return dict(comp.get(tensor.arrows, {}))

    def entries(self) -> Iterator[tuple]:
        for xx, by_in in self.components.items():
            for ins, by_out in by_in.items():
                for outs, coeff in by_out.items():
                    yield xx, ins, outs, coeff

    def support_types(self) -> list:
        return list(self.components)

    def is_zero(self) -> bool:
        return not self.components

    def zero_like(self, intrinsic_degree: Optional[int] = None) -> "PCYElement":
        return PCYElement(
            self.source,
            self.target,
            self.object_map,
            self.d,
            {},
            self.intrinsic_degree if intrinsic_degree is None else intrinsic_degree,
            self.max_inputs,
            self.max_outputs,
            validate=False,
        )

    def add(self, other: "PCYElement", coeff: Fraction = Fraction(1)) -> "PCYElement":
        if self.intrinsic_degree != other.intrinsic_degree or self.d != other.d:
            raise ArgumentError("cannot add elements of different degree or d")
        comps = {k: {i: dict(o) for i, o in v.items()} for k, v in self.components.items()}
        for xx, by_in in other.components.items():
            dest = comps.setdefault(xx, {})
            for ins, by_out in by_in.items():
                dest[ins] = vec_add(dest.get(ins, {}), by_out, coeff)
                if not dest[ins]:
                    del dest[ins]
            if not dest:
                del comps[xx]
        return PCYElement(
            self.source,
            self.target,
            self.object_map,
            self.d,
            comps,
            self.intrinsic_degree,
            max(self.max_inputs, other.max_inputs),
            max(self.max_outputs, other.max_outputs),
            validate=False,
        )

    def scale(self, coeff) -> "PCYElement":
        coeff = ensure_scalar(coeff)
        comps = {
            xx: {ins: vec_scale(by_out, coeff) for ins, by_out in by_in.items()}
            for xx, by_in in self.components.items()
        }
        return PCYElement(
            self.source,
            self.target,
            self.object_map,
            self.d,
            comps,
            self.intrinsic_degree,
            self.max_inputs,
            self.max_outputs,
            validate=False,
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PCYElement)
            and self.components == other.components
            and self.d == other.d
            and self.intrinsic_degree == other.intrinsic_degree
        )

    def __repr__(self) -> str:
        return (
            f"PCYElement(d={self.d}, deg={self.intrinsic_degree}, "
            f"types={len(self.components)})"
        )


class TriplePoint:
    """A point of the big bracket's carrier: two structures and a morphism slot.

    The middle slot carries an implicit extra desuspension: its carrier degree
    is intrinsic+1. `flavor` is "ainf" (MultiMap slots) or "pcy" (PCYElement
    slots). Any slot may be None, meaning zero.
    """

    __slots__ = ("target_structure", "middle", "source_structure", "flavor")

    def __init__(self, target_structure, middle, source_structure, flavor: str):
        if flavor not in ("ainf", "pcy"):
            raise ArgumentError(f"unknown flavor {flavor}")
        self.target_structure = target_structure
        self.middle = middle
        self.source_structure = source_structure
        self.flavor = flavor

    def map_slots(self, fn: Callable) -> "TriplePoint":
        return TriplePoint(
            fn(self.target_structure),
            fn(self.middle),
            fn(self.source_structure),
            self.flavor,
        )

    def add(self, other: "TriplePoint", coeff: Fraction = Fraction(1)) -> "TriplePoint":
        def merge(a, b):
            if a is None:
                return b.scale(coeff) if b is not None else None
            if b is None:
                return a
            return a.add(b, coeff)

        return TriplePoint(
            merge(self.target_structure, other.target_structure),
            merge(self.middle, other.middle),
            merge(self.source_structure, other.source_structure),
            self.flavor,
        )

    def scale(self, coeff) -> "TriplePoint":
        def sc(a):
            return None if a is None else a.scale(coeff)

        return self.map_slots(sc)

    def is_zero(self) -> bool:
        return all(
            slot is None or slot.is_zero()
            for slot in (self.target_structure, self.middle, self.source_structure)
        )

    def __repr__(self) -> str:
        return f"TriplePoint(flavor={self.flavor})"


# ---------------------------------------------------------------------------
# Polynomial families a(t) + b(t) dt
# ---------------------------------------------------------------------------


class PolyFamily:
    """A pair of polynomials in t with structure-valued coefficients.

    a_coeffs[k] is the coefficient of t^k in a(t); likewise b_coeffs for the
    dt part. Coefficients are MultiMap, PCYElement, or TriplePoint values and
    must all share kind and underlying quivers. Trailing zero coefficients are
    trimmed.
    """

    def __init__(self, a_coeffs: Sequence, b_coeffs: Sequence):
        raw = list(a_coeffs) + list(b_coeffs)
        if not raw:
            raise ArgumentError("family needs at least one coefficient")
        self._template = raw[0].scale(Fraction(0))
        self.a_coeffs = _trim(list(a_coeffs))
        self.b_coeffs = _trim(list(b_coeffs))

    def template(self):
        """A zero value of the coefficient kind carried by this family."""
        return self._template

    def a_at(self, t) -> object:
        val = _poly_eval(self.a_coeffs, t)
        return self._template if val is None else val

    def b_at(self, t) -> object:
        val = _poly_eval(self.b_coeffs, t)
        return self._template if val is None else val

    def derivative_a(self) -> list:
        """Coefficient list of da/dt."""
        out = []
        for k, coeff in enumerate(self.a_coeffs):
            if k == 0:
                continue
            out.append(coeff.scale(Fraction(k)))
        return out

    def __repr__(self) -> str:
        return f"PolyFamily(a deg {len(self.a_coeffs)-1}, b deg {len(self.b_coeffs)-1})"


def _trim(coeffs: list) -> list:
    while coeffs and coeffs[-1].is_zero():
        coeffs.pop()
    return coeffs


def _poly_eval(coeffs: list, t):
    t = ensure_scalar(t)
    acc = None
    power = Fraction(1)
    for coeff in coeffs:
        term = coeff.scale(power)
        acc = term if acc is None else acc.add(term)
        power *= t
    return acc


def differentiate_family(fam: PolyFamily) -> PolyFamily:
    """The family whose a-part is da/dt and whose b-part is empty (zero)."""
    deriv = fam.derivative_a()
    if not deriv:
        deriv = [fam.template()]
    return PolyFamily(deriv, [])


def apply_component(mapping, tensor: BasisTensor) -> dict:
    """Evaluate a stored component on a pure tensor (uniform front door)."""
    return mapping.apply(tensor)
