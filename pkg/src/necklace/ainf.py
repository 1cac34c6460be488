"""Single-output structure calculus on graded quivers.

This module builds the morphism-level layer on top of the diagram engine:

* structure maps whose self-insertion vanishes, and morphism data between
  two of them (block families of fixed intrinsic degree);
* the insertion composition and its commutator;
* two bracket families. The fixed bracket acts on map families between two
  chosen structures; the big bracket acts on three-slot carrier points
  whose outer slots hold candidate structures and whose middle slot holds a
  map family, so structure and morphism data vary together.
* residual computations for the graded antisymmetry and Jacobi laws, for
  the structure and morphism identities, and for the flatness condition
  written as a factorial-weighted bracket series;
* polynomial homotopies: a path a(t) with direction b(t), checked
  symbolically in t against endpoint, flatness, and derivative conditions,
  plus transports of such paths along a fixed morphism on either side;
* linear-algebra consequences: quasi-isomorphism detection by exact cone
  ranks and extraction of the arity-1 chain homotopy.

All argument lists for bracket families are written in ascending position
order: args[0] is the innermost argument. It feeds the lowest satellite
slot and carries no reordering weight in the position sign.

Every coefficient is an exact rational.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Optional, Sequence

from .diagrams import enumerate_diagrams, evaluate_all
from .quivers import (
    ArgumentError,
    DegreeError,
    GradedQuiver,
    MultiMap,
    PolyFamily,
    TriplePoint,
    TruncationError,
    identity_object_map,
)
from .signs import Permutation, delta_exponent, sign_pow


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


class CheckReport:
    """Outcome of an exact verification.

    residual_support lists (location, basis tensor, coefficient) rows with
    nonzero coefficients; the verdict is "pass" exactly when that list is
    empty. bounds_used records the windows within which the verification is
    complete; outside them nothing is claimed.
    """

    def __init__(self, residual_support, bounds_used):
        self.residual_support = sorted(
            residual_support, key=lambda row: (str(row[0]), str(row[1]))
        )
        self.bounds_used = dict(bounds_used)
        self.verdict = "pass" if not self.residual_support else "fail"

    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_text(self) -> str:
        bounds = " ".join(f"{k}={v}" for k, v in sorted(self.bounds_used.items()))
        lines = [
            f"verdict: {self.verdict}",
            f"bounds_used: {bounds}",
            f"residual_support: {len(self.residual_support)}",
        ]
        for loc, tensor, coeff in self.residual_support:
            lines.append(f"  {loc} | {tensor} | {coeff}")
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"CheckReport({self.verdict}, support={len(self.residual_support)})"


_BAND_NAMES = ("target-structure", "middle", "source-structure")


def _map_rows(mm: Optional[MultiMap], window: int, prefix: tuple = ()) -> list:
    rows = []
    if mm is None:
        return rows
    for x in sorted(mm.components, key=str):
        if len(x) - 1 > window:
            continue
        loc = prefix + (x,) if prefix else x
        for ins in sorted(mm.components[x]):
            for out, coeff in sorted(mm.components[x][ins].items()):
                rows.append((loc, (ins, (out,)), coeff))
    return rows


def _triple_rows(tp: Optional[TriplePoint], window: int, prefix: tuple = ()) -> list:
    rows = []
    if tp is None:
        return rows
    slots = (tp.target_structure, tp.middle, tp.source_structure)
    for band, mm in zip(_BAND_NAMES, slots):
        rows.extend(_map_rows(mm, window, prefix + (band,)))
    return rows


def _element_rows(elem, window: int, prefix: tuple = ()) -> list:
    if elem is None:
        return []
    if isinstance(elem, TriplePoint):
        return _triple_rows(elem, window, prefix)
    return _map_rows(elem, window, prefix)


# ---------------------------------------------------------------------------
# Normalisation helpers
# ---------------------------------------------------------------------------


def _as_map(value) -> MultiMap:
    """Underlying MultiMap of a wrapper type, or the value itself."""
    return getattr(value, "underlying", value)


def _with_window(mm: MultiMap, window: int) -> MultiMap:
    """Copy of mm whose completeness bound is window; wider components are
    dropped because nothing complete is known about them."""
    comps = {x: v for x, v in mm.components.items() if len(x) - 1 <= window}
    return MultiMap(
        mm.source, mm.target, mm.object_map, comps,
        mm.intrinsic_degree, window, mm.out_shift, validate=False,
    )


def _acc(total, term, coeff: Fraction = Fraction(1)):
    """None-aware accumulation of map-like values."""
    if term is None:
        return total
    if total is None:
        return term.scale(coeff) if coeff != 1 else term
    return total.add(term, coeff)


def _acc_entry(comps: dict, key, ins, out, coeff) -> None:
    by_in = comps.setdefault(key, {})
    by_out = by_in.setdefault(ins, {})
    new = by_out.get(out, Fraction(0)) + coeff
    if new:
        by_out[out] = new
    else:
        by_out.pop(out, None)
        if not by_out:
            by_in.pop(ins, None)
            if not by_in:
                comps.pop(key, None)


# ---------------------------------------------------------------------------
# Structures and morphism data
# ---------------------------------------------------------------------------


class AInfStructure:
    """A structure map on one quiver with vanishing self-insertion.

    The underlying MultiMap must be an endomorphism family of intrinsic
    degree 1 fixing every object. Construction verifies the defining
    identity up to the declared arity bound; pass verify=False to store
    unverified data (negative controls, deliberately broken tables).
    """

    def __init__(self, underlying: MultiMap, verify: bool = True):
        if underlying.source != underlying.target:
            raise ArgumentError("structure maps live on a single quiver")
        if underlying.intrinsic_degree != 1:
            raise DegreeError("structure maps have intrinsic degree 1")
        if underlying.out_shift != 1:
            raise ArgumentError("structure maps use the standard output shift")
        if any(underlying.object_map[o] != o for o in underlying.source.objects):
            raise ArgumentError("structure maps fix every object")
        self.underlying = underlying
        if verify:
            report = stasheff_residual(self)
            if not report.passed():
                loc, tensor, coeff = report.residual_support[0]
                raise ArgumentError(
                    f"structure map fails its defining identity at {loc}: "
                    f"{tensor} -> {coeff}"
                )

    @property
    def quiver(self) -> GradedQuiver:
        return self.underlying.source

    @property
    def max_arity(self) -> int:
        return self.underlying.max_arity

    def __repr__(self) -> str:
        return (
            f"AInfStructure(W={self.max_arity}, "
            f"types={len(self.underlying.components)})"
        )


class AInfMorphismData:
    """Morphism data between two quivers: a degree-0 block family.

    The object map rides on the underlying MultiMap. Construction checks
    degree and shift only; whether the data satisfies the morphism identity
    against a chosen pair of structures is the job of morphism_residual.
    """

    def __init__(self, underlying: MultiMap):
        if underlying.intrinsic_degree != 0:
            raise DegreeError("morphism data has intrinsic degree 0")
        if underlying.out_shift != 1:
            raise ArgumentError("morphism data uses the standard output shift")
        self.underlying = underlying

    @property
    def object_map(self) -> dict:
        return dict(self.underlying.object_map)

    @property
    def source(self) -> GradedQuiver:
        return self.underlying.source

    @property
    def target(self) -> GradedQuiver:
        return self.underlying.target

    @property
    def max_arity(self) -> int:
        return self.underlying.max_arity

    def __repr__(self) -> str:
        return f"AInfMorphismData(W={self.max_arity})"


def arity_part(m, n: int) -> MultiMap:
    """Restriction of a map family to its arity-n components.

    The completeness bound is kept: all other arities of the result are
    known to be zero rather than unknown.
    """
    mm = _as_map(m)
    comps = {x: v for x, v in mm.components.items() if len(x) - 1 == n}
    return MultiMap(
        mm.source, mm.target, mm.object_map, comps,
        mm.intrinsic_degree, mm.max_arity, mm.out_shift, validate=False,
    )


def identity_morphism(base, max_arity: Optional[int] = None) -> AInfMorphismData:
    """Identity morphism data on a quiver or on a structure's quiver."""
    if isinstance(base, AInfStructure):
        quiver = base.quiver
        if max_arity is None:
            max_arity = base.max_arity
    else:
        quiver = base
        if max_arity is None:
            raise ArgumentError("pass max_arity when starting from a bare quiver")
    comps: dict = {}
    for name in quiver.all_arrow_names():
        src, tgt = quiver.ends(name)
        comps.setdefault((tgt, src), {})[(name,)] = {name: Fraction(1)}
    return AInfMorphismData(
        MultiMap(
            quiver, quiver, identity_object_map(quiver), comps, 0, max_arity,
        )
    )


# ---------------------------------------------------------------------------
# Insertion composition
# ---------------------------------------------------------------------------


def insert_compose(f, g) -> MultiMap:
    """Sum over single insertions of g's output into each input slot of f.

    Each term's sign is the shifted parity of g times the total shifted
    degree of the inputs standing left of the insertion slot. Components
    wider than either operand's bound are dropped and the result's bound is
    the smaller of the two. Inserting under extra inputs is only defined
    when both families share their source quiver; an arity-1-only outer
    family may take inner families from anywhere.
    """
    fm = _as_map(f)
    gm = _as_map(g)
    if gm.target != fm.source:
        raise ArgumentError("inner map must land in the outer map's source")
    same_source = gm.source == fm.source
    window = min(fm.max_arity, gm.max_arity)
    parity = gm.intrinsic_degree + gm.out_shift - 1
    comps: dict = {}
    for fkey in sorted(fm.components, key=str):
        arity = len(fkey) - 1
        if arity > 1 and not same_source:
            raise ArgumentError(
                "insertion under extra inputs needs matching source quivers"
            )
        for j in range(arity):
            want = (fkey[j + 1], fkey[j])
            for gkey in sorted(gm.components, key=str):
                out_ends = (gm.object_map[gkey[-1]], gm.object_map[gkey[0]])
                if out_ends != want:
                    continue
                ckey = fkey[:j] + tuple(gkey) + fkey[j + 2:]
                if len(ckey) - 1 > window:
                    continue
                for f_ins, f_outs in fm.components[fkey].items():
                    eaten = f_ins[j]
                    prefix = sum(
                        fm.source.degree(f_ins[i]) - 1 for i in range(j)
                    )
                    sgn = sign_pow(parity * prefix)
                    for g_ins, g_outs in gm.components[gkey].items():
                        g_coeff = g_outs.get(eaten)
                        if g_coeff is None:
                            continue
                        cins = f_ins[:j] + g_ins + f_ins[j + 1:]
                        for f_out, f_coeff in f_outs.items():
                            _acc_entry(
                                comps, ckey, cins, f_out,
                                sgn * g_coeff * f_coeff,
                            )
    object_map = {o: fm.object_map[gm.object_map[o]] for o in gm.source.objects}
    return MultiMap(
        gm.source, fm.target, object_map, comps,
        fm.intrinsic_degree + gm.intrinsic_degree + gm.out_shift - 1,
        window, fm.out_shift,
    )


def gerstenhaber_bracket(x, y) -> MultiMap:
    """Insertion commutator with the intrinsic-degree Koszul sign."""
    xm = _as_map(x)
    ym = _as_map(y)
    swap = sign_pow(xm.intrinsic_degree * ym.intrinsic_degree)
    return insert_compose(xm, ym).add(insert_compose(ym, xm), Fraction(-swap))


# ---------------------------------------------------------------------------
# Block sums through the diagram engine
# ---------------------------------------------------------------------------


def _psi_sum(center, sats: Sequence, window: Optional[int] = None) -> MultiMap:
    """Signed diagram sum with sats[i] feeding slot i of the center.

    Satellites must share source, target, and object map, and must land in
    the center's source. Components wider than the window are dropped.
    """
    cm = _as_map(center)
    sat_maps = [_as_map(s) for s in sats]
    base = sat_maps[0]
    for sm in sat_maps:
        if sm.source != base.source or sm.object_map != base.object_map:
            raise ArgumentError("satellites must agree on source and object map")
        if sm.target != cm.source:
            raise ArgumentError("satellites must land in the center's source")
    w = min([cm.max_arity] + [sm.max_arity for sm in sat_maps])
    if window is not None:
        w = min(w, window)
    fillings = {"center": cm}
    for i, sm in enumerate(sat_maps):
        fillings[f"sat{i}"] = sm
    comps: dict = {}
    for diag in enumerate_diagrams("psi-ainf", fillings):
        key = diag.composite_key[0]
        if len(key) - 1 > w:
            continue
        for ins, by_out in evaluate_all(diag, fillings).items():
            for (out,), coeff in by_out.items():
                _acc_entry(comps, key, ins, out, coeff)
    object_map = {o: cm.object_map[base.object_map[o]] for o in base.source.objects}
    intrinsic = cm.intrinsic_degree + sum(sm.intrinsic_degree for sm in sat_maps)
    return MultiMap(base.source, cm.target, object_map, comps, intrinsic, w)


def compose_morphisms(g, f) -> AInfMorphismData:
    """Block composition of morphism data: every way of splitting the inputs
    of one g-component into consecutive f-blocks, summed with its diagram
    sign."""
    gm = _as_map(g)
    fm = _as_map(f)
    if fm.target != gm.source:
        raise ArgumentError("inner morphism must land in the outer's source")
    if gm.intrinsic_degree != 0 or fm.intrinsic_degree != 0:
        raise DegreeError("morphism data has intrinsic degree 0")
    window = min(gm.max_arity, fm.max_arity)
    total = None
    for k in range(1, window + 1):
        total = _acc(total, _psi_sum(gm, [fm] * k, window))
    object_map = {o: gm.object_map[fm.object_map[o]] for o in fm.source.objects}
    if total is None:
        total = MultiMap(
            fm.source, gm.target, object_map, {}, 0, window, validate=False
        )
    return AInfMorphismData(_with_window(total, window))


# ---------------------------------------------------------------------------
# Structure and morphism residuals
# ---------------------------------------------------------------------------


def stasheff_residual(m) -> CheckReport:
    """Support of the self-insertion of a structure map."""
    mm = _as_map(m)
    if mm.source != mm.target:
        raise ArgumentError("structure maps live on a single quiver")
    res = insert_compose(mm, mm)
    return CheckReport(
        _map_rows(res, res.max_arity), {"max_arity": mm.max_arity}
    )


def morphism_residual(m_A, m_B, f) -> CheckReport:
    """Support of (target blocks through f) minus (f after source insertion).

    The first term sums, per composite type, the target structure applied to
    consecutive f-blocks; the second inserts the source structure into f.
    Pass means the morphism identity holds up to the common bound.
    """
    ma = _as_map(m_A)
    mb = _as_map(m_B)
    fm = _as_map(f)
    if fm.source != ma.source or fm.target != mb.source:
        raise ArgumentError("morphism data does not connect the two structures")
    if fm.intrinsic_degree != 0:
        raise DegreeError("morphism data has intrinsic degree 0")
    window = min(ma.max_arity, mb.max_arity, fm.max_arity)
    block = None
    for k in range(1, window + 1):
        block = _acc(block, _psi_sum(mb, [fm] * k, window))
    res = _acc(block, insert_compose(fm, ma), Fraction(-1))
    return CheckReport(_map_rows(res, window), {"max_arity": window})


# ---------------------------------------------------------------------------
# The fixed bracket (map families between two chosen structures)
# ---------------------------------------------------------------------------


class FixedBracket:
    """Bracket family on map families between two fixed structures.

    apply takes arguments in ascending position order. For one argument it
    returns the commutator-style differential; for n of them it returns the
    position-weighted, permutation-summed satellite expansion around the
    target structure. The carrier degree of an argument is its intrinsic
    degree plus one.
    """

    flavor = "ainf"

    def __init__(self, m_A, m_B):
        ma = _as_map(m_A)
        mb = _as_map(m_B)
        for mm in (ma, mb):
            if mm.source != mm.target:
                raise ArgumentError("structure maps live on a single quiver")
            if mm.intrinsic_degree != 1:
                raise DegreeError("structure maps have intrinsic degree 1")
        self.source_map = ma
        self.target_map = mb
        self.base_window = min(ma.max_arity, mb.max_arity)

    def carrier_degree(self, element) -> int:
        if isinstance(element, TriplePoint):
            raise ArgumentError("this bracket takes plain map families")
        return _as_map(element).intrinsic_degree + 1

    def window(self, elements) -> int:
        return min(
            [self.base_window] + [_as_map(e).max_arity for e in elements]
        )

    def flow_cutoff(self, window: int) -> int:
        return window

    def apply(self, args: Sequence) -> MultiMap:
        args = [_as_map(a) for a in args]
        n = len(args)
        if n == 0:
            raise ArgumentError("the bracket needs at least one argument")
        for a in args:
            if isinstance(a, TriplePoint):
                raise ArgumentError("this bracket takes plain map families")
            if a.source != self.source_map.source:
                raise ArgumentError("argument source quiver mismatch")
            if a.target != self.target_map.source:
                raise ArgumentError("argument target quiver mismatch")
            if a.object_map != args[0].object_map:
                raise ArgumentError("arguments must share one object map")
        window = self.window(args)
        if n == 1:
            f = args[0]
            first = insert_compose(arity_part(self.target_map, 1), f)
            second = insert_compose(f, self.source_map)
            sgn = -sign_pow(f.intrinsic_degree)
            return _with_window(first.add(second, Fraction(sgn)), window)
        if n > self.target_map.max_arity:
            raise TruncationError(
                f"bracket arity {n} exceeds the structure bound "
                f"{self.target_map.max_arity}"
            )
        intrinsic = 1 + sum(a.intrinsic_degree for a in args)
        if any(a.is_zero() for a in args):
            return _with_window(args[0].zero_like(intrinsic), window)
        degrees = [a.intrinsic_degree for a in args]
        eps = sum(k * degrees[k] for k in range(n))
        total = None
        for perm in Permutation.all(n):
            sgn = sign_pow(eps + delta_exponent(perm, degrees))
            sats = [args[perm(j) - 1] for j in range(1, n + 1)]
            total = _acc(
                total, _psi_sum(self.target_map, sats, window), Fraction(sgn)
            )
        return _with_window(total, window)


def fixed_bracket(m_A, m_B, fs: Sequence) -> MultiMap:
    """Value of the fixed bracket of the fs between the two structures."""
    return FixedBracket(m_A, m_B).apply(list(fs))


def mc_residual(m_A, m_B, f) -> CheckReport:
    """Support of the factorial-weighted bracket series of a degree-1 map.

    Pass is equivalent to the morphism identity for the same data; the two
    reports agree on their verdict and essentially on their support.
    """
    bracket = FixedBracket(m_A, m_B)
    fm = _as_map(f)
    if bracket.carrier_degree(fm) != 1:
        raise DegreeError("flatness is a condition on carrier degree 1")
    window = bracket.window([fm])
    total = None
    for n in range(1, bracket.flow_cutoff(window) + 1):
        total = _acc(
            total, bracket.apply([fm] * n), Fraction(1, math.factorial(n))
        )
    return CheckReport(_map_rows(total, window), {"max_arity": window})


# ---------------------------------------------------------------------------
# The big bracket (three-slot carrier points)
# ---------------------------------------------------------------------------


def _triple_carrier_degree(tp: TriplePoint) -> int:
    degs = set()
    if tp.target_structure is not None and not tp.target_structure.is_zero():
        degs.add(tp.target_structure.intrinsic_degree)
    if tp.middle is not None and not tp.middle.is_zero():
        degs.add(tp.middle.intrinsic_degree + 1)
    if tp.source_structure is not None and not tp.source_structure.is_zero():
        degs.add(tp.source_structure.intrinsic_degree)
    if not degs:
        return 0
    if len(degs) > 1:
        raise DegreeError("carrier point mixes degrees across its slots")
    return degs.pop()


def _triple_windows(tp: TriplePoint) -> list:
    out = []
    for slot in (tp.target_structure, tp.middle, tp.source_structure):
        if slot is not None and not slot.is_zero():
            out.append(slot.max_arity)
    return out


def big_bracket(args: Sequence) -> TriplePoint:
    """Case-dispatched bracket on three-slot carrier points.

    Nonzero cases: two outer-slot elements on the same side meet in their
    insertion commutator; one target-side structure among middle elements
    produces the position-weighted satellite expansion around it; a single
    source-side structure next to one middle element produces the insertion
    of the middle into the structure with its swap sign. The two
    structure-involving cases carry an extra factor of the structure's
    parity, which is what makes a plain homotopy wrap into a passing weak
    one with the same direction. Everything else is zero by the defining
    case list, and the value is multilinear over slot decompositions.
    """
    args = list(args)
    n = len(args)
    if n == 0:
        raise ArgumentError("the bracket needs at least one argument")
    for a in args:
        if not isinstance(a, TriplePoint):
            raise ArgumentError("this bracket takes three-slot carrier points")
        if a.flavor != "ainf":
            raise ArgumentError("single-output carrier points expected")
        _triple_carrier_degree(a)
    windows = [w for a in args for w in _triple_windows(a)]
    if not windows:
        return TriplePoint(None, None, None, "ainf")
    w_all = min(windows)

    choices = []
    for a in args:
        opts = []
        if a.target_structure is not None and not a.target_structure.is_zero():
            opts.append(("B", a.target_structure))
        if a.middle is not None and not a.middle.is_zero():
            opts.append(("M", a.middle))
        if a.source_structure is not None and not a.source_structure.is_zero():
            opts.append(("A", a.source_structure))
        choices.append(opts)

    res_b = res_m = res_a = None
    for combo in itertools.product(*choices):
        bands = [band for band, _ in combo]
        elems = [elem for _, elem in combo]
        n_b = bands.count("B")
        n_a = bands.count("A")
        if n == 1:
            continue
        if n_a and n_b:
            continue
        if n_b + n_a == 0:
            continue
        if n > 2 and (n_a or n_b >= 2):
            continue
        if n == 2 and n_b == 2:
            res_b = _acc(res_b, gerstenhaber_bracket(elems[1], elems[0]))
        elif n == 2 and n_a == 2:
            res_a = _acc(res_a, gerstenhaber_bracket(elems[1], elems[0]))
        elif n_b == 1:
            idx = bands.index("B")
            sm = elems[idx]
            fs = [elems[k] for k in range(n) if k != idx]
            if len(fs) > sm.max_arity:
                raise TruncationError(
                    f"bracket arity {n} exceeds the structure bound "
                    f"{sm.max_arity}"
                )
            degrees = [x.intrinsic_degree for x in fs]
            i = idx
            eps = (
                (i + 1)
                + (i + 1) * sm.intrinsic_degree
                + sm.intrinsic_degree * sum(degrees[i:])
                + sum(k * degrees[k] for k in range(len(fs)))
            )
            for perm in Permutation.all(len(fs)):
                sgn = sign_pow(eps + delta_exponent(perm, degrees))
                sats = [fs[perm(j) - 1] for j in range(1, len(fs) + 1)]
                res_m = _acc(res_m, _psi_sum(sm, sats, w_all), Fraction(sgn))
        else:
            idx = bands.index("A")
            sm = elems[idx]
            fm = elems[1 - idx]
            val = insert_compose(fm, sm)
            if idx == 0:
                res_m = _acc(res_m, val, Fraction(sign_pow(sm.intrinsic_degree)))
            else:
                sgn = -sign_pow(
                    (fm.intrinsic_degree + 1) * sm.intrinsic_degree
                    + sm.intrinsic_degree
                )
                res_m = _acc(res_m, val, Fraction(sgn))

    def clamp(mm):
        return None if mm is None else _with_window(mm, w_all)

    return TriplePoint(clamp(res_b), clamp(res_m), clamp(res_a), "ainf")


class BigBracket:
    """Bracket family interface around the three-slot carrier bracket."""

    flavor = "ainf"

    def carrier_degree(self, element) -> int:
        if not isinstance(element, TriplePoint):
            raise ArgumentError("this bracket takes three-slot carrier points")
        return _triple_carrier_degree(element)

    def window(self, elements) -> int:
        windows = []
        for e in elements:
            if not isinstance(e, TriplePoint):
                raise ArgumentError("this bracket takes three-slot carrier points")
            windows.extend(_triple_windows(e))
        if not windows:
            raise ArgumentError("no nonzero slot fixes a completeness bound")
        return min(windows)

    def flow_cutoff(self, window: int) -> int:
        return window + 1

    def apply(self, args: Sequence) -> TriplePoint:
        return big_bracket(list(args))


# ---------------------------------------------------------------------------
# Law residuals
# ---------------------------------------------------------------------------


def antisymmetry_residual(bracket, args: Sequence, i: int):
    """Value plus swap-signed value after exchanging args[i] and args[i+1].

    Zero exactly when graded antisymmetry holds at that adjacent pair.
    """
    args = list(args)
    if not 0 <= i < len(args) - 1:
        raise ArgumentError("swap position out of range")
    swapped = list(args)
    swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
    sgn = sign_pow(
        bracket.carrier_degree(args[i]) * bracket.carrier_degree(args[i + 1])
    )
    return bracket.apply(args).add(bracket.apply(swapped), Fraction(sgn))


def jacobi_residual(bracket, args: Sequence, bound: int = 3):
    """Signed sum over splittings of nested bracket values.

    For each size k and each ascending split of the positions into an inner
    group and its complement, the inner bracket value enters the outer
    bracket in the last position, weighted by the unshuffle sign built from
    carrier degrees and positions. Zero exactly when the higher Jacobi
    identity holds on these arguments.
    """
    args = list(args)
    n = len(args)
    if n == 0:
        raise ArgumentError("the law needs at least one argument")
    if n > bound:
        raise ArgumentError(f"law check limited to {bound} arguments")
    degrees = [bracket.carrier_degree(a) for a in args]
    total = None
    for k in range(1, n + 1):
        for comb in itertools.combinations(range(1, n + 1), k):
            rest = [q for q in range(1, n + 1) if q not in comb]
            delta = 0
            for pos, r in enumerate(comb):
                delta += degrees[r - 1] * sum(
                    degrees[s - 1] for s in range(r + 1, n + 1)
                )
                delta += n - r
                for s in comb[pos + 1:]:
                    delta += degrees[r - 1] * degrees[s - 1] + 1
            inner = bracket.apply([args[q - 1] for q in comb])
            outer = [args[q - 1] for q in rest] + [inner]
            total = _acc(
                total, bracket.apply(outer), Fraction(sign_pow(k + delta))
            )
    return total


# ---------------------------------------------------------------------------
# Polynomial homotopies
# ---------------------------------------------------------------------------


def _normalize_endpoint(value):
    if isinstance(value, AInfMorphismData):
        return value.underlying
    return value


def _series_weight(combo) -> Fraction:
    weight = Fraction(1)
    for _, group in itertools.groupby(combo):
        weight /= math.factorial(len(list(group)))
    return weight


def _mc_series(bracket, a_coeffs: list, n_max: int) -> dict:
    """{power of t: value} for the factorial-weighted bracket series of a(t).

    Repeated slots are collapsed to multisets, which is exact because the
    bracket is symmetric on equal-degree arguments.
    """
    out: dict = {}
    for n in range(1, n_max + 1):
        for combo in itertools.combinations_with_replacement(
            range(len(a_coeffs)), n
        ):
            if any(a_coeffs[i].is_zero() for i in combo):
                continue
            term = bracket.apply([a_coeffs[i] for i in combo])
            power = sum(combo)
            out[power] = _acc(out.get(power), term, _series_weight(combo))
    return out


def _flow_series(bracket, a_coeffs: list, b_coeffs: list, n_max: int) -> dict:
    """{power of t: value} for the derivative side of the flow equation:
    the direction occupies the innermost position, the path fills the rest."""
    out: dict = {}
    for n in range(1, n_max + 1):
        for m in range(len(b_coeffs)):
            if b_coeffs[m].is_zero():
                continue
            for combo in itertools.combinations_with_replacement(
                range(len(a_coeffs)), n - 1
            ):
                if any(a_coeffs[i].is_zero() for i in combo):
                    continue
                term = bracket.apply(
                    [b_coeffs[m]] + [a_coeffs[i] for i in combo]
                )
                power = m + sum(combo)
                out[power] = _acc(out.get(power), term, _series_weight(combo))
    return out


def homotopy_check(bracket, fam: PolyFamily, endpoints) -> CheckReport:
    """Symbolic-in-t verification that fam is a homotopy between endpoints.

    Three conditions, each reported per power of t: the path matches the
    endpoints at 0 and 1; the factorial-weighted bracket series of the path
    is the zero polynomial; the path's derivative equals the flow series
    along the direction. Pass requires all three.
    """
    start, end = endpoints
    start = _normalize_endpoint(start)
    end = _normalize_endpoint(end)
    a_coeffs = list(fam.a_coeffs) or [fam.template()]
    b_coeffs = list(fam.b_coeffs)
    for coeff in a_coeffs + [start, end]:
        if not coeff.is_zero() and bracket.carrier_degree(coeff) != 1:
            raise DegreeError("the path and endpoints need carrier degree 1")
    for coeff in b_coeffs:
        if not coeff.is_zero() and bracket.carrier_degree(coeff) != 0:
            raise DegreeError("the direction needs carrier degree 0")
    window = bracket.window(a_coeffs + b_coeffs + [start, end])
    n_max = bracket.flow_cutoff(window)
    rows = []
    rows += _element_rows(
        fam.a_at(0).add(start, Fraction(-1)), window, ("endpoint-0",)
    )
    rows += _element_rows(
        fam.a_at(1).add(end, Fraction(-1)), window, ("endpoint-1",)
    )
    flat = _mc_series(bracket, a_coeffs, n_max)
    for power in sorted(flat):
        rows += _element_rows(flat[power], window, ("flat", power))
    lhs = {j: coeff for j, coeff in enumerate(fam.derivative_a())}
    rhs = _flow_series(bracket, a_coeffs, b_coeffs, n_max)
    for power in sorted(set(lhs) | set(rhs)):
        diff = _acc(lhs.get(power), rhs.get(power), Fraction(-1))
        rows += _element_rows(diff, window, ("flow", power))
    return CheckReport(rows, {"max_arity": window, "series_terms": n_max})


def weak_family(m_A, m_B, fam: PolyFamily) -> PolyFamily:
    """Wrap a map-family homotopy into three-slot carrier points: the
    structures ride on the constant coefficient of the path."""
    ma = _as_map(m_A)
    mb = _as_map(m_B)
    a_coeffs = list(fam.a_coeffs) or [fam.template()]
    wrapped_a = [
        TriplePoint(mb if k == 0 else None, coeff, ma if k == 0 else None, "ainf")
        for k, coeff in enumerate(a_coeffs)
    ]
    wrapped_b = [
        TriplePoint(None, coeff, None, "ainf") for coeff in fam.b_coeffs
    ]
    if not wrapped_b:
        wrapped_b = []
    return PolyFamily(wrapped_a, wrapped_b)


def weak_endpoints(m_A, m_B, f, g) -> tuple:
    """Endpoint carrier points matching weak_family's wrapping."""
    ma = _as_map(m_A)
    mb = _as_map(m_B)
    return (
        TriplePoint(mb, _normalize_endpoint(f), ma, "ainf"),
        TriplePoint(mb, _normalize_endpoint(g), ma, "ainf"),
    )


def flow_homotopy(bracket, start, direction) -> PolyFamily:
    """Integrate the flow equation from a degree-1 start along a constant
    degree-0 direction.

    The path's arity-L behaviour only depends on strictly lower arities of
    itself, so iterating integration from the constant path stabilises
    within the completeness bound; failure to stabilise is reported rather
    than truncated silently.
    """
    start_m = _normalize_endpoint(start)
    window = bracket.window([start_m, direction])
    n_max = bracket.flow_cutoff(window)
    b_coeffs = [direction]
    a_coeffs = [start_m]
    zero = start_m.scale(Fraction(0))
    for _ in range(window + 2):
        series = _flow_series(bracket, a_coeffs, b_coeffs, n_max)
        top = max(series) if series else -1
        new_a = [start_m] + [
            series.get(j, zero).scale(Fraction(1, j + 1)) for j in range(top + 1)
        ]
        while new_a and new_a[-1].is_zero():
            new_a.pop()
        if new_a == a_coeffs:
            return PolyFamily(a_coeffs or [zero], b_coeffs)
        a_coeffs = new_a
    raise ArgumentError("flow failed to stabilise within the expected passes")


# ---------------------------------------------------------------------------
# The contraction-based homotopy and summand helpers
# ---------------------------------------------------------------------------


def direct_sum_structure(base: AInfStructure, extension: GradedQuiver,
                         differential: MultiMap) -> AInfStructure:
    """Structure on the arrow-wise sum of a base quiver and an extension
    carrying only an arity-1 differential."""
    bq = base.quiver
    if tuple(bq.objects) != tuple(extension.objects):
        raise ArgumentError("summands must share their objects")
    overlap = set(bq.all_arrow_names()) & set(extension.all_arrow_names())
    if overlap:
        raise ArgumentError(f"summands share arrow names: {sorted(overlap)}")
    d = _as_map(differential)
    if d.source != extension or d.target != extension:
        raise ArgumentError("the differential must be an endomap of the extension")
    if d.intrinsic_degree != 1:
        raise DegreeError("a differential has intrinsic degree 1")
    if any(len(x) != 2 for x in d.components):
        raise ArgumentError("the extension differential must be arity-1 only")
    merged_homs: dict = {}
    for quiver in (bq, extension):
        for pair, arrows in quiver.homs.items():
            merged_homs.setdefault(pair, [])
            merged_homs[pair] = merged_homs[pair] + list(arrows)
    total = GradedQuiver(bq.objects, merged_homs)
    comps = {
        x: {ins: dict(outs) for ins, outs in by_in.items()}
        for x, by_in in base.underlying.components.items()
    }
    for x, by_in in d.components.items():
        comps.setdefault(x, {}).update(
            {ins: dict(outs) for ins, outs in by_in.items()}
        )
    return AInfStructure(
        MultiMap(
            total, total, identity_object_map(total), comps, 1, base.max_arity
        )
    )


def summand_inclusion(part: AInfStructure, total: AInfStructure) -> AInfMorphismData:
    """Arity-1 morphism data sending each arrow of a summand to itself."""
    comps: dict = {}
    for name in part.quiver.all_arrow_names():
        if not total.quiver.has_arrow(name):
            raise ArgumentError(f"arrow {name} is missing from the sum")
        src, tgt = part.quiver.ends(name)
        comps.setdefault((tgt, src), {})[(name,)] = {name: Fraction(1)}
    return AInfMorphismData(
        MultiMap(
            part.quiver, total.quiver, identity_object_map(part.quiver),
            comps, 0, total.max_arity,
        )
    )


def summand_projection(total: AInfStructure, part: AInfStructure) -> AInfMorphismData:
    """Arity-1 morphism data keeping a summand's arrows and killing the rest."""
    comps: dict = {}
    for name in part.quiver.all_arrow_names():
        if not total.quiver.has_arrow(name):
            raise ArgumentError(f"arrow {name} is missing from the sum")
        src, tgt = part.quiver.ends(name)
        comps.setdefault((tgt, src), {})[(name,)] = {name: Fraction(1)}
    return AInfMorphismData(
        MultiMap(
            total.quiver, part.quiver,
            {o: o for o in total.quiver.objects},
            comps, 0, total.max_arity,
        )
    )


def contractible_homotopy(base: AInfStructure, extension: GradedQuiver,
                          differential: MultiMap, contraction: MultiMap) -> PolyFamily:
    """The scaling homotopy on a sum with a contractible extension.

    The path fixes the base arrows and scales the extension arrows by t;
    the direction applies the contraction to the extension arrows. Requires
    the differential to square to zero and the contraction identity (d
    after h plus h after d equals the identity on the extension); the
    result passes homotopy_check between inclusion-after-projection and the
    identity on the sum.
    """
    d = _as_map(differential)
    h = _as_map(contraction)
    if h.source != extension or h.target != extension:
        raise ArgumentError("the contraction must be an endomap of the extension")
    if h.intrinsic_degree != -1:
        raise DegreeError("a contraction has intrinsic degree -1")
    if any(len(x) != 2 for x in h.components):
        raise ArgumentError("the contraction must be arity-1 only")
    total = direct_sum_structure(base, extension, d)
    if not insert_compose(d, d).is_zero():
        raise ArgumentError("the differential does not square to zero")
    if extension.all_arrow_names():
        ident = _as_map(identity_morphism(extension, max_arity=1))
        gap = insert_compose(d, h).add(insert_compose(h, d)).add(
            ident, Fraction(-1)
        )
        if not gap.is_zero():
            raise ArgumentError(
                "the contraction identity fails on the extension"
            )
    sum_quiver = total.quiver
    window = total.max_arity

    def diagonal(names) -> dict:
        comps: dict = {}
        for name in names:
            src, tgt = sum_quiver.ends(name)
            comps.setdefault((tgt, src), {})[(name,)] = {name: Fraction(1)}
        return comps

    ident_map = identity_object_map(sum_quiver)
    a0 = MultiMap(
        sum_quiver, sum_quiver, ident_map,
        diagonal(base.quiver.all_arrow_names()), 0, window,
    )
    a1 = MultiMap(
        sum_quiver, sum_quiver, ident_map,
        diagonal(extension.all_arrow_names()), 0, window,
    )
    b0 = MultiMap(
        sum_quiver, sum_quiver, ident_map,
        {x: {ins: dict(outs) for ins, outs in by_in.items()}
         for x, by_in in h.components.items()},
        -1, window,
    )
    return PolyFamily([a0, a1], [b0])


# ---------------------------------------------------------------------------
# Transport of homotopies along a fixed morphism
# ---------------------------------------------------------------------------


def transport_homotopy(h, fam: PolyFamily, side: str) -> PolyFamily:
    """Push a homotopy through a fixed morphism on the chosen side.

    On the left the morphism becomes the center of block diagrams whose
    satellites are path coefficients, with the direction occupying each
    slot in turn for the direction part. On the right each path and
    direction coefficient becomes the center and the morphism fills every
    slot. Powers of t are bookkept exactly; no prefactors appear.
    """
    hm = _as_map(h)
    if hm.intrinsic_degree != 0:
        raise DegreeError("transport needs degree-0 morphism data")
    template = fam.template()
    if isinstance(template, TriplePoint):
        raise ArgumentError("transport acts on plain map families")
    a_coeffs = list(fam.a_coeffs)
    b_coeffs = list(fam.b_coeffs)
    window = min(
        [hm.max_arity]
        + [c.max_arity for c in a_coeffs + b_coeffs] or [hm.max_arity]
    )
    x_acc: dict = {}
    y_acc: dict = {}
    if side == "left":
        if template.target != hm.source:
            raise ArgumentError("left transport composes after the family")
        source_q, target_q = template.source, hm.target
        object_map = {
            o: hm.object_map[template.object_map[o]]
            for o in template.source.objects
        }
        for k in range(1, window + 1):
            for tup in itertools.product(range(len(a_coeffs)), repeat=k):
                if any(a_coeffs[i].is_zero() for i in tup):
                    continue
                power = sum(tup)
                x_acc[power] = _acc(
                    x_acc.get(power),
                    _psi_sum(hm, [a_coeffs[i] for i in tup], window),
                )
            for p in range(k):
                for m in range(len(b_coeffs)):
                    if b_coeffs[m].is_zero():
                        continue
                    for tup in itertools.product(
                        range(len(a_coeffs)), repeat=k - 1
                    ):
                        if any(a_coeffs[i].is_zero() for i in tup):
                            continue
                        sats = (
                            [a_coeffs[i] for i in tup[:p]]
                            + [b_coeffs[m]]
                            + [a_coeffs[i] for i in tup[p:]]
                        )
                        power = m + sum(tup)
                        y_acc[power] = _acc(
                            y_acc.get(power), _psi_sum(hm, sats, window)
                        )
    elif side == "right":
        if template.source != hm.target:
            raise ArgumentError("right transport precomposes with the morphism")
        source_q, target_q = hm.source, template.target
        object_map = {
            o: template.object_map[hm.object_map[o]]
            for o in hm.source.objects
        }
        for j, coeff in enumerate(a_coeffs):
            if coeff.is_zero():
                continue
            for k in range(1, window + 1):
                x_acc[j] = _acc(x_acc.get(j), _psi_sum(coeff, [hm] * k, window))
        for m, coeff in enumerate(b_coeffs):
            if coeff.is_zero():
                continue
            for k in range(1, window + 1):
                y_acc[m] = _acc(y_acc.get(m), _psi_sum(coeff, [hm] * k, window))
    else:
        raise ArgumentError("side must be left or right")
    zero_x = MultiMap(
        source_q, target_q, object_map, {}, 0, window, validate=False
    )
    zero_y = MultiMap(
        source_q, target_q, object_map, {}, -1, window, validate=False
    )
    xs = [
        x_acc.get(j, zero_x) for j in range(max(x_acc, default=-1) + 1)
    ]
    ys = [
        y_acc.get(j, zero_y) for j in range(max(y_acc, default=-1) + 1)
    ]
    if not xs:
        xs = [zero_x]
    return PolyFamily(xs, ys)


# ---------------------------------------------------------------------------
# Arrow-level linear algebra: quasi-isomorphisms and chain homotopies
# ---------------------------------------------------------------------------


def _rank(rows: list) -> int:
    rows = [list(r) for r in rows]
    if not rows or not rows[0]:
        return 0
    rank = 0
    n_cols = len(rows[0])
    for col in range(n_cols):
        pivot = None
        for r in range(rank, len(rows)):
            if rows[r][col]:
                pivot = r
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        lead = rows[rank][col]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                factor = rows[r][col] / lead
                rows[r] = [v - factor * p for v, p in zip(rows[r], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def _linear_entries(mm: MultiMap, x: tuple) -> dict:
    """{input arrow: {output arrow: coeff}} of the arity-1 component at x."""
    out: dict = {}
    for ins, by_out in mm.components.get(x, {}).items():
        out[ins[0]] = dict(by_out)
    return out


def quasi_iso_check(m_A, m_B, f) -> dict:
    """Per arity-1 tuple type: does the arrow-level map induce isomorphisms
    on cohomology of the arrow complexes?

    Decided exactly: the mapping cone of the arity-1 part is assembled per
    type and its acyclicity is read off from ranks over the rationals.
    """
    ma = _as_map(m_A)
    mb = _as_map(m_B)
    fm = _as_map(f)
    if fm.source != ma.source or fm.target != mb.source:
        raise ArgumentError("morphism data does not connect the two structures")
    d_a = arity_part(ma, 1)
    d_b = arity_part(mb, 1)
    f1 = arity_part(fm, 1)
    if not insert_compose(d_a, d_a).is_zero():
        raise ArgumentError("source differential does not square to zero")
    if not insert_compose(d_b, d_b).is_zero():
        raise ArgumentError("target differential does not square to zero")
    gap = insert_compose(d_b, f1).add(insert_compose(f1, d_a), Fraction(-1))
    if not gap.is_zero():
        raise ArgumentError("arity-1 part is not a chain map")

    verdicts = {}
    for x0 in fm.source.objects:
        for x1 in fm.source.objects:
            verdicts[(x0, x1)] = _cone_acyclic(fm, d_a, d_b, (x0, x1))
    return verdicts


def _cone_acyclic(fm: MultiMap, d_a: MultiMap, d_b: MultiMap, x: tuple) -> bool:
    x0, x1 = x
    src_arrows = fm.source.arrows(x1, x0)
    y = (fm.object_map[x0], fm.object_map[x1])
    tgt_arrows = fm.target.arrows(y[1], y[0])
    da_table = _linear_entries(d_a, x)
    db_table = _linear_entries(d_b, y)
    f_table = _linear_entries(fm, x)

    def basis(e: int) -> tuple:
        cone_a = [name for name, deg in src_arrows if deg == e + 1]
        cone_b = [name for name, deg in tgt_arrows if deg == e]
        return cone_a, cone_b

    degrees = set()
    for name, deg in src_arrows:
        degrees.add(deg - 1)
    for name, deg in tgt_arrows:
        degrees.add(deg)
    if not degrees:
        return True

    def matrix(e: int) -> list:
        cone_a, cone_b = basis(e)
        next_a, next_b = basis(e + 1)
        row_index = {("a", nm): i for i, nm in enumerate(next_a)}
        for i, nm in enumerate(next_b):
            row_index[("b", nm)] = len(next_a) + i
        n_rows = len(next_a) + len(next_b)
        cols = []
        for nm in cone_a:
            col = [Fraction(0)] * n_rows
            for out, coeff in da_table.get(nm, {}).items():
                col[row_index[("a", out)]] -= coeff
            for out, coeff in f_table.get(nm, {}).items():
                col[row_index[("b", out)]] += coeff
            cols.append(col)
        for nm in cone_b:
            col = [Fraction(0)] * n_rows
            for out, coeff in db_table.get(nm, {}).items():
                col[row_index[("b", out)]] += coeff
            cols.append(col)
        if not cols:
            return []
        return [
            [cols[c][r] for c in range(len(cols))] for r in range(n_rows)
        ]

    ranks = {}
    for e in sorted(degrees):
        for probe in (e - 1, e):
            if probe not in ranks:
                ranks[probe] = _rank(matrix(probe))
        cone_a, cone_b = basis(e)
        dim = len(cone_a) + len(cone_b)
        if dim != ranks[e] + ranks[e - 1]:
            return False
    return True


def chain_homotopy_extract(m_A, m_B, fam: PolyFamily) -> tuple:
    """Arrow-level chain homotopy read off a polynomial homotopy.

    Integrates the direction's arity-1 part exactly over [0, 1] and reports
    whether the two-sided differential composition reproduces the endpoint
    difference per tuple type.
    """
    ma = _as_map(m_A)
    mb = _as_map(m_B)
    template = fam.template()
    if isinstance(template, TriplePoint):
        raise ArgumentError("extraction acts on plain map families")
    total = None
    for k, coeff in enumerate(fam.b_coeffs):
        total = _acc(total, arity_part(coeff, 1), Fraction(1, k + 1))
    if total is None:
        total = template.zero_like(-1)
    d_a = arity_part(ma, 1)
    d_b = arity_part(mb, 1)
    f1 = arity_part(fam.a_at(0), 1)
    g1 = arity_part(fam.a_at(1), 1)
    residual = (
        insert_compose(d_b, total)
        .add(insert_compose(total, d_a))
        .add(g1, Fraction(-1))
        .add(f1)
    )
    report = CheckReport(_map_rows(residual, 1), {"max_arity": 1})
    return total, report
