"""Shared fixtures: small quivers and structure maps used across the suite."""

from fractions import Fraction

from necklace.quivers import GradedQuiver, MultiMap, identity_object_map


def dual_numbers() -> GradedQuiver:
    """One object, basis {one (deg 0), x (deg 1)} with x*x = 0."""
    return GradedQuiver(
        objects=["*"],
        homs={("*", "*"): [("one", 0), ("x", 1)]},
    )


def dual_numbers_m2(quiver=None) -> MultiMap:
    """The multiplication of the dual numbers as a degree-1 two-ary map."""
    q = quiver or dual_numbers()
    t = ("*", "*", "*")
    comps = {
        t: {
            ("one", "one"): {"one": Fraction(1)},
            ("one", "x"): {"x": Fraction(1)},
            ("x", "one"): {"x": Fraction(1)},
        }
    }
    return MultiMap(
        source=q,
        target=q,
        object_map=identity_object_map(q),
        components=comps,
        intrinsic_degree=1,
        max_arity=4,
    )


def dual_numbers_m2_shifted(quiver=None) -> MultiMap:
    """Product twisted by the shift sign of the left factor.

    The twist flips the coefficient whenever the left input is the odd
    generator, which is exactly what makes the self-insertion residual
    vanish on this quiver.
    """
    q = quiver or dual_numbers()
    comps = {
        ("*", "*", "*"): {
            ("one", "one"): {"one": Fraction(1)},
            ("one", "x"): {"x": Fraction(1)},
            ("x", "one"): {"x": Fraction(-1)},
        }
    }
    return MultiMap(
        source=q,
        target=q,
        object_map=identity_object_map(q),
        components=comps,
        intrinsic_degree=1,
        max_arity=4,
    )


def two_object_quiver() -> GradedQuiver:
    """Two objects u, v with arrows p: u->v (deg 0), q: v->u (deg 1),
    r: u->u (deg 1), s: v->v (deg 1)."""
    return GradedQuiver(
        objects=["u", "v"],
        homs={
            ("u", "v"): [("p", 0)],
            ("v", "u"): [("q", 1)],
            ("u", "u"): [("r", 1)],
            ("v", "v"): [("s", 1)],
        },
    )


def two_object_m2(quiver=None) -> MultiMap:
    """Composition-style product: m2(q,p) = r, m2(p,q) = s, all else zero.

    Inputs are written target-side first (slot order matches tuple types), so
    the (v,u,v) component eats (q, p) and lands in hom(u,u)... checked by the
    degree validator against the tuple-type slot convention.
    """
    q = quiver or two_object_quiver()
    comps = {
        # type (u, v, u): slot 1 wants v->u i.e. q... slot reading:
        # slots of (x1,x2,x3) are (x2->x1, x3->x2).
        # We want output r: u->u, inputs q: v->u then p: u->v.
        ("u", "v", "u"): {("q", "p"): {"r": Fraction(1)}},
        ("v", "u", "v"): {("p", "q"): {"s": Fraction(1)}},
    }
    return MultiMap(
        source=q,
        target=q,
        object_map=identity_object_map(q),
        components=comps,
        intrinsic_degree=1,
        max_arity=4,
    )


def contractible_pair():
    """Two-arrow extension with a differential and its contraction.

    Arrows u (deg 0) and v (deg 1) on the one-object quiver, d(u) = v and
    h(v) = u, so that dh + hd is the identity of the extension.
    """
    ext = GradedQuiver(["*"], {("*", "*"): [("u", 0), ("v", 1)]})
    d = MultiMap(ext, ext, identity_object_map(ext),
                 {("*", "*"): {("u",): {"v": Fraction(1)}}}, 1, 4)
    h = MultiMap(ext, ext, identity_object_map(ext),
                 {("*", "*"): {("v",): {"u": Fraction(1)}}}, -1, 4)
    return ext, d, h


def random_endo_map(rng, quiver, intrinsic, entries=4, max_arity=3, window=4):
    """Random degree-respecting endo map family with small exact coefficients.

    Entries are sampled by drawing composable input tuples and matching them
    with outputs of the degree the intrinsic degree dictates; tuples with no
    matching output are simply rejected.
    """
    names = quiver.all_arrow_names()
    comps = {}
    placed = 0
    tries = 0
    while placed < entries and tries < 80 * entries:
        tries += 1
        k = rng.randint(1, max_arity)
        ins = tuple(rng.choice(names) for _ in range(k))
        if any(quiver.ends(ins[i])[0] != quiver.ends(ins[i + 1])[1]
               for i in range(k - 1)):
            continue
        need = intrinsic + sum(quiver.degree(a) - 1 for a in ins) + 1
        outs = [
            n for n in names
            if quiver.degree(n) == need
            and (quiver.ends(n)[0], quiver.ends(n)[1])
            == (quiver.ends(ins[-1])[0], quiver.ends(ins[0])[1])
        ]
        if not outs:
            continue
        x = (quiver.ends(ins[0])[1],) + tuple(quiver.ends(a)[0] for a in ins)
        by_in = comps.setdefault(x, {}).setdefault(ins, {})
        by_in[rng.choice(outs)] = Fraction(rng.randint(-3, 3))
        placed += 1
    return MultiMap(quiver, quiver, identity_object_map(quiver), comps,
                    intrinsic, window)
