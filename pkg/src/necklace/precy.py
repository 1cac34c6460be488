"""Cyclically invariant multi-output calculus on graded quivers.

This layer works with sparse families of multi-output maps whose keys are
cyclic words of object tuples. It provides:

* the rotation action on such families, with orbit averaging and an exact
  invariance check;
* the necklace composition (one output of one disc plugged into one input
  slot of another, over all alignments) and its graded commutator, whose
  square-zero elements are the structure elements of this layer;
* the two one-sided compositions of a map family with a structure element,
  the central disc either feeding every satellite or being fed in every
  slot, and the morphism identity built from their difference;
* tree composition and identities for the resulting category of morphism
  data;
* embeddings to and from the single-output calculus, so every verdict here
  can be cross-checked against that layer on single-output fixtures.

Coefficients are exact rationals throughout.
"""

from __future__ import annotations

import itertools
import warnings
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .ainf import CheckReport
from .diagrams import enumerate_diagrams, evaluate_all
from .quivers import (
    ArgumentError,
    DegreeError,
    GradedQuiver,
    InvarianceError,
    MultiMap,
    PCYElement,
    identity_object_map,
    multi_num_inputs,
    rotate_multi_tuple,
)
from .signs import Permutation, koszul_exponent, sign_pow


class InvarianceWarning(UserWarning):
    """Raised as a warning when an element is silently symmetrized."""


# ---------------------------------------------------------------------------
# Entry-level helpers
# ---------------------------------------------------------------------------


def _acc_pcy(comps: dict, key, ins, outs, coeff) -> None:
    if not coeff:
        return
    by_in = comps.setdefault(key, {})
    by_out = by_in.setdefault(ins, {})
    new = by_out.get(outs, Fraction(0)) + coeff
    if new:
        by_out[outs] = new
    else:
        del by_out[outs]
        if not by_out:
            del by_in[ins]
        if not by_in:
            del comps[key]


def _group_slices(key) -> list:
    """Half-open ranges cut by the group sizes of a multi-tuple key."""
    slices = []
    start = 0
    for grp in key:
        size = len(grp) - 1
        slices.append((start, start + size))
        start += size
    return slices


def _block_degrees(elem: PCYElement, key, ins) -> list:
    degs = []
    for a, b in _group_slices(key):
        degs.append(sum(elem.source.degree(name) - 1 for name in ins[a:b]))
    return degs


def _out_degrees(elem: PCYElement, outs) -> list:
    # Output factors rotate exactly as displayed, carrying arrow degree
    # plus d each.  The element's overall suspension sits in front of the
    # whole output string and never hops, so it contributes no sign here.
    return [elem.target.degree(name) + elem.d for name in outs]


def _pcy_rows(elem: Optional[PCYElement], max_ins: int, max_outs: int,
              prefix: tuple = ()) -> list:
    rows = []
    if elem is None:
        return rows
    for key in sorted(elem.components, key=str):
        if multi_num_inputs(key) > max_ins or len(key) > max_outs:
            continue
        loc = prefix + (key,) if prefix else key
        for ins in sorted(elem.components[key]):
            for outs, coeff in sorted(elem.components[key][ins].items()):
                rows.append((loc, (ins, outs), coeff))
    return rows


# ---------------------------------------------------------------------------
# The rotation action
# ---------------------------------------------------------------------------


def _rotated_entry(elem: PCYElement, key, ins, outs, k: int):
    """One stored entry pushed through the rotation by k.

    Returns the new key, its flat inputs, its outputs, and the sign unit.
    Group blocks permute with Koszul signs built from total shifted input
    degrees; output factors permute with signs built from their degrees in
    the output convention (arrow degree plus d).
    """
    n = len(key)
    k %= n
    if k == 0:
        return key, ins, outs, 1
    new_key = rotate_multi_tuple(key, -k)
    slices = _group_slices(key)
    order = [(j + k) % n for j in range(n)]
    new_ins = tuple(
        itertools.chain.from_iterable(ins[slices[g][0]:slices[g][1]] for g in order)
    )
    new_outs = tuple(outs[g] for g in order)
    stored_blocks = _block_degrees(elem, key, ins)
    new_blocks = [stored_blocks[g] for g in order]
    e_in = koszul_exponent(Permutation.rotation(n, k), new_blocks)
    e_out = koszul_exponent(Permutation.rotation(n, -k), _out_degrees(elem, outs))
    return new_key, new_ins, new_outs, sign_pow(e_in + e_out)


def _rotation_amounts(sigma) -> dict:
    """Validated map from key length to rotation amount."""
    if sigma is None:
        raise ArgumentError("act mode needs per-length cyclic permutations")
    amounts = {}
    for n, perm in dict(sigma).items():
        if not isinstance(perm, Permutation) or perm.size != n:
            raise ArgumentError(f"entry for length {n} is not a size-{n} permutation")
        k = perm(1) - 1
        if perm != Permutation.rotation(n, k):
            raise ArgumentError(f"permutation for length {n} is not cyclic")
        amounts[n] = k
    return amounts


def cyclic_action(sigma, element: PCYElement, mode: str = "act"):
    """Rotation action on a multi-output family.

    act applies the given per-length cyclic permutations. symmetrize
    averages each component over its rotation orbit. check reports every
    entry on which some rotation disagrees with the element itself, so an
    empty report certifies invariance within the declared bounds.
    """
    if mode not in ("act", "symmetrize", "check"):
        raise ArgumentError(f"unknown mode {mode!r}")
    if mode == "act":
        amounts = _rotation_amounts(sigma)
        comps: dict = {}
        for key, ins, outs, coeff in element.entries():
            k = amounts.get(len(key), 0)
            nkey, nins, nouts, sgn = _rotated_entry(element, key, ins, outs, k)
            _acc_pcy(comps, nkey, nins, nouts, coeff * sgn)
        return PCYElement(
            element.source, element.target, element.object_map, element.d,
            comps, element.intrinsic_degree,
            element.max_inputs, element.max_outputs,
        )
    if sigma is not None:
        raise ArgumentError("pass sigma only in act mode")
    if mode == "symmetrize":
        comps = {}
        for key, ins, outs, coeff in element.entries():
            n = len(key)
            share = coeff / n
            for k in range(n):
                nkey, nins, nouts, sgn = _rotated_entry(element, key, ins, outs, k)
                _acc_pcy(comps, nkey, nins, nouts, share * sgn)
        return PCYElement(
            element.source, element.target, element.object_map, element.d,
            comps, element.intrinsic_degree,
            element.max_inputs, element.max_outputs,
        )
    rows = []
    lengths = sorted({len(key) for key in element.components})
    for n in lengths:
        for k in range(1, n):
            diff: dict = {}
            for key, ins, outs, coeff in element.entries():
                if len(key) != n:
                    continue
                nkey, nins, nouts, sgn = _rotated_entry(element, key, ins, outs, k)
                _acc_pcy(diff, nkey, nins, nouts, coeff * sgn)
                _acc_pcy(diff, key, ins, outs, -coeff)
            for key in sorted(diff, key=str):
                for ins in sorted(diff[key]):
                    for outs, coeff in sorted(diff[key][ins].items()):
                        rows.append(((f"rotation-{k}", key), (ins, outs), coeff))
    return CheckReport(rows, {
        "max_inputs": element.max_inputs,
        "max_outputs": element.max_outputs,
    })


def require_invariant(element: PCYElement, what: str = "element") -> None:
    report = cyclic_action(None, element, mode="check")
    if not report.passed():
        raise InvarianceError(f"{what} is not invariant under rotations")


def ensure_invariant(element: PCYElement, strict: bool = False,
                     what: str = "element") -> PCYElement:
    """Gatekeeper used at ingestion time.

    In strict mode a non-invariant element is rejected; otherwise it is
    replaced by its orbit average and a warning is issued.
    """
    report = cyclic_action(None, element, mode="check")
    if report.passed():
        return element
    if strict:
        raise InvarianceError(f"{what} is not invariant under rotations")
    warnings.warn(
        f"{what} was not invariant and has been symmetrized",
        InvarianceWarning,
        stacklevel=2,
    )
    return cyclic_action(None, element, mode="symmetrize")


# ---------------------------------------------------------------------------
# Embeddings between the single-output and multi-output layers
# ---------------------------------------------------------------------------


def embed_single_output(mm: MultiMap, d: int) -> PCYElement:
    """View a single-output family as a one-group multi-output element."""
    if mm.out_shift != 1:
        raise ArgumentError("only once-shifted output conventions embed")
    comps: dict = {}
    for x, ins, outs, coeff in mm.entries():
        comps.setdefault((tuple(x),), {}).setdefault(ins, {})[outs] = coeff
    return PCYElement(
        mm.source, mm.target, mm.object_map, d, comps,
        mm.intrinsic_degree, mm.max_arity, 1,
    )


def restrict_single_output(elem: PCYElement) -> MultiMap:
    """The one-group part of a multi-output element, as a plain map family."""
    comps: dict = {}
    for key, ins, outs, coeff in elem.entries():
        if len(key) != 1:
            continue
        comps.setdefault(key[0], {}).setdefault(ins, {})[outs[0]] = coeff
    return MultiMap(
        elem.source, elem.target, elem.object_map, comps,
        elem.intrinsic_degree, elem.max_inputs,
    )


# ---------------------------------------------------------------------------
# Necklace composition and bracket
# ---------------------------------------------------------------------------


def _diagram_sum(shape: str, fillings: Mapping, cap_ins: int, cap_outs: int,
                 **options) -> dict:
    comps: dict = {}
    for diag in enumerate_diagrams(shape, fillings, **options):
        key = diag.composite_key
        if multi_num_inputs(key) > cap_ins or len(key) > cap_outs:
            continue
        for ins, by_out in evaluate_all(diag, fillings).items():
            for outs, coeff in by_out.items():
                _acc_pcy(comps, key, ins, outs, coeff)
    return comps


def _require_same_carrier(left: PCYElement, right: PCYElement) -> None:
    if left.source != right.source or left.target != right.target:
        raise ArgumentError("operands live on different quivers")
    if left.source != left.target:
        raise ArgumentError("necklace operands live on a single quiver")
    if left.object_map != right.object_map:
        raise ArgumentError("operands disagree on objects")
    if left.d != right.d:
        raise ArgumentError("operands carry different shift parameters")


def necklace_compose(left: PCYElement, right: PCYElement) -> PCYElement:
    """Sum over diagrams feeding one output of `right` into a slot of `left`."""
    _require_same_carrier(left, right)
    max_ins = min(left.max_inputs, right.max_inputs)
    max_outs = min(left.max_outputs, right.max_outputs)
    comps = _diagram_sum(
        "necklace", {"host": left, "guest": right}, max_ins, max_outs
    )
    return PCYElement(
        left.source, left.target, left.object_map, left.d, comps,
        left.intrinsic_degree + right.intrinsic_degree, max_ins, max_outs,
    )


def necklace_bracket(left: PCYElement, right: PCYElement) -> PCYElement:
    swap = sign_pow(left.intrinsic_degree * right.intrinsic_degree)
    return necklace_compose(left, right).add(
        necklace_compose(right, left), Fraction(-swap)
    )


class NecklaceLie:
    """The necklace commutator packaged as a bracket family.

    Only the binary term is nonzero, so the law residual helpers of the
    single-output layer apply unchanged.
    """

    def carrier_degree(self, element: PCYElement) -> int:
        return element.intrinsic_degree

    def apply(self, args: Sequence) -> PCYElement:
        if len(args) == 2:
            return necklace_bracket(args[1], args[0])
        total = sum(a.intrinsic_degree for a in args)
        return args[0].zero_like(total)


def precy_residual(m: PCYElement) -> CheckReport:
    """Support of the necklace self-composition of a structure element."""
    if m.source != m.target:
        raise ArgumentError("structure elements live on a single quiver")
    if m.intrinsic_degree != 1:
        raise DegreeError("structure elements have intrinsic degree 1")
    require_invariant(m, "structure element")
    res = necklace_compose(m, m)
    return CheckReport(
        _pcy_rows(res, res.max_inputs, res.max_outputs),
        {"max_inputs": m.max_inputs, "max_outputs": m.max_outputs},
    )


# ---------------------------------------------------------------------------
# One-sided compositions and the morphism identity
# ---------------------------------------------------------------------------


def multinec_compose(f: PCYElement, m_a: PCYElement) -> PCYElement:
    """Central structure disc on the source, every output feeding an f disc."""
    if m_a.source != m_a.target or m_a.source != f.source:
        raise ArgumentError("the structure must live on the morphism's source")
    if m_a.d != f.d:
        raise ArgumentError("operands carry different shift parameters")
    if f.intrinsic_degree != 0:
        raise DegreeError("morphism data has intrinsic degree 0")
    max_ins = min(f.max_inputs, m_a.max_inputs)
    max_outs = min(f.max_outputs, m_a.max_outputs)
    comps = _diagram_sum(
        "multinec", {"center": m_a, "sat": f}, max_ins, max_outs
    )
    return PCYElement(
        f.source, f.target, f.object_map, f.d, comps,
        m_a.intrinsic_degree, max_ins, max_outs,
    )


def pre_compose(m_b: PCYElement, f: PCYElement) -> PCYElement:
    """Central structure disc on the target, fed by an f disc in every slot."""
    if m_b.source != m_b.target or m_b.source != f.target:
        raise ArgumentError("the structure must live on the morphism's target")
    if m_b.d != f.d:
        raise ArgumentError("operands carry different shift parameters")
    if f.intrinsic_degree != 0:
        raise DegreeError("morphism data has intrinsic degree 0")
    max_ins = min(f.max_inputs, m_b.max_inputs)
    max_outs = min(f.max_outputs, m_b.max_outputs)
    comps = _diagram_sum("pre", {"center": m_b, "sat": f}, max_ins, max_outs)
    return PCYElement(
        f.source, f.target, f.object_map, f.d, comps,
        m_b.intrinsic_degree, max_ins, max_outs,
    )


def morphism_residual_pcy(m_a: PCYElement, m_b: PCYElement,
                          f: PCYElement) -> CheckReport:
    """Support of (f after the source structure) minus (target structure fed
    by f), the identity that makes f a morphism of structures."""
    if f.intrinsic_degree != 0:
        raise DegreeError("morphism data has intrinsic degree 0")
    require_invariant(f, "morphism data")
    lhs = multinec_compose(f, m_a)
    rhs = pre_compose(m_b, f)
    res = lhs.add(rhs, Fraction(-1))
    max_ins = min(lhs.max_inputs, rhs.max_inputs)
    max_outs = min(lhs.max_outputs, rhs.max_outputs)
    return CheckReport(
        _pcy_rows(res, max_ins, max_outs),
        {"max_inputs": max_ins, "max_outputs": max_outs},
    )


# ---------------------------------------------------------------------------
# Category structure on morphism data
# ---------------------------------------------------------------------------


def compose_pcy(g: PCYElement, f: PCYElement) -> PCYElement:
    """Tree composition: every f output consumed by a g slot and vice versa."""
    if f.target != g.source:
        raise ArgumentError("inner morphism must land in the outer's source")
    if f.d != g.d:
        raise ArgumentError("operands carry different shift parameters")
    if g.intrinsic_degree != 0 or f.intrinsic_degree != 0:
        raise DegreeError("morphism data has intrinsic degree 0")
    max_ins = min(g.max_inputs, f.max_inputs)
    max_outs = min(g.max_outputs, f.max_outputs)
    comps = _diagram_sum(
        "pcy-compose", {"up": g, "down": f}, max_ins, max_outs,
        max_ins=max_ins, max_outs=max_outs,
    )
    object_map = {o: g.object_map[f.object_map[o]] for o in f.source.objects}
    return PCYElement(
        f.source, g.target, object_map, f.d, comps, 0, max_ins, max_outs,
    )


def identity_pcy(base, d: Optional[int] = None,
                 max_inputs: Optional[int] = None,
                 max_outputs: Optional[int] = None) -> PCYElement:
    """Identity morphism data: the diagonal on each arrow, nothing else."""
    if isinstance(base, PCYElement):
        quiver = base.source
        d = base.d if d is None else d
        max_inputs = base.max_inputs if max_inputs is None else max_inputs
        max_outputs = base.max_outputs if max_outputs is None else max_outputs
    else:
        quiver = base
        if d is None or max_inputs is None or max_outputs is None:
            raise ArgumentError("pass d and both bounds when starting from a quiver")
    comps: dict = {}
    for name in quiver.all_arrow_names():
        src, tgt = quiver.ends(name)
        comps.setdefault(((tgt, src),), {})[(name,)] = {(name,): Fraction(1)}
    return PCYElement(
        quiver, quiver, identity_object_map(quiver), d, comps,
        0, max_inputs, max_outputs,
    )
