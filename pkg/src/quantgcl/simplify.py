"""Normalization of quantities into a small canonical form.

The rewriter is a single bottom-up pass whose smart constructors each return
normalized output on normalized input.  Its job is twofold: fold away the
bookkeeping the transformer rules generate (indicator brackets of true/false
guards, min/max with infinities, negations), and put what remains into a
canonical shape so that structurally growing loop iterates can be detected
as equal when they stabilize.

Normal form, roughly:

* arithmetic is kept as integer-linear forms (constant + integer-coefficient
  terms over variables and remainder atoms); remainder arguments are reduced
  modulo the divisor, so (x - 4) % 4 and x % 4 coincide;
* comparisons are tightened over the integers (x < e becomes x <= e - 1),
  oriented deterministically, and arranged with positive terms on the left;
* guards are negation-normal with flattened, sorted, deduplicated
  conjunctions/disjunctions; same-linear-part comparisons are merged
  (x >= 10 && x >= 0 collapses to x >= 10), single-variable equalities pin
  their variable inside a conjunction, conjunctions distribute over small
  disjunctions, and entailed members are absorbed (p || q drops p whenever
  p implies q member-by-member, dually for &&);
* min/max are flattened, sorted, deduplicated; indicator members merge
  ([p] min [q] is [p && q]); infinities act as identities/absorbers; subset
  absorption applies (max(q, min(p, q)) is q);
* negation is pushed to the leaves and eliminated (-[p] is [!p]);
* scaling by zero folds to 0, integral scaling of arithmetic folds into the
  product, scaling of an indicator is the indicator;
* addition folds constants and merges arithmetic summands (indeterminate
  +inf + -inf is left in place so evaluation still reports it);
* Sup/Inf: binders with no free occurrence drop; Sup distributes over max
  (Inf over min) and hoists binder-free members out of the dual operation;
  an equality conjunct with a unit-coefficient occurrence of the binder is
  solved and substituted away (Sup a. min([x = a + k], g(a)) becomes
  g(x - k)); a disequality member dually for Inf; Sup of arithmetic with a
  nonzero linear coefficient of the binder is +inf (Inf is -inf).

The quantifier rules implement the integer-state semantics.  Windowed
evaluation agrees with them whenever the solved witnesses lie inside the
alpha window, which is the window-size obligation the evaluation contract
places on callers; all other rewrites are exact for every window.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Optional

from .lattice import ExtReal, NEG_INF, POS_INF
from .syntax import (
    Add, AExpr, And, Arith, BExpr, BoolLit, Cmp, Const, Inf, IntLit, Iverson,
    Mod, Mul, Not, Or, QAdd, QMax, QMin, QNeg, QScale, Quantity, Sub, Sup,
    Var, fv_quantity, quantity_key, subst_quantity,
)

# ---------------------------------------------------------------------------
# Integer-linear forms
#
# LinForm = (const, terms) where terms is a sorted tuple of (atom, coeff)
# with nonzero integer coeffs.  Atoms: ('v', name) for a variable, or
# ('m', inner_linform, modulus) for a remainder subterm.
# ---------------------------------------------------------------------------

LinForm = tuple


def _atom_sort_key(atom) -> tuple:
    if atom[0] == "v":
        return (0, atom[1], 0, "")
    return (1, "", atom[2], repr(atom[1]))


def _mk_lin(const: int, terms: dict) -> LinForm:
    items = tuple(sorted(((a, c) for a, c in terms.items() if c != 0),
                         key=lambda ac: _atom_sort_key(ac[0])))
    return (const, items)


def lin_const(c: int) -> LinForm:
    return (c, ())


def lin_add(a: LinForm, b: LinForm) -> LinForm:
    terms = dict(a[1])
    for atom, c in b[1]:
        terms[atom] = terms.get(atom, 0) + c
    return _mk_lin(a[0] + b[0], terms)


def lin_scale(k: int, a: LinForm) -> LinForm:
    if k == 0:
        return lin_const(0)
    return _mk_lin(k * a[0], {atom: k * c for atom, c in a[1]})


def lin_neg(a: LinForm) -> LinForm:
    return lin_scale(-1, a)


def lin_shift(a: LinForm, c: int) -> LinForm:
    return (a[0] + c, a[1])


def lin_is_const(a: LinForm) -> bool:
    return not a[1]


def _mod_form(inner: LinForm, m: int) -> LinForm:
    """Normalize ``inner % m``: reduce coefficients and constant euclidean-mod
    m; a constant folds outright; a bare remainder atom with a divisor
    dividing m is already reduced."""
    const = inner[0] % m
    terms = {atom: c % m for atom, c in inner[1]}
    reduced = _mk_lin(const, terms)
    if lin_is_const(reduced):
        return lin_const(reduced[0])
    if (reduced[0] == 0 and len(reduced[1]) == 1):
        atom, c = reduced[1][0]
        if c == 1 and atom[0] == "m" and m % atom[2] == 0:
            # value already lies in [0, atom divisor) ⊆ [0, m)
            return reduced
    return (0, ((("m", reduced, m), 1),))


def lin_of_aexpr(e: AExpr) -> LinForm:
    if isinstance(e, IntLit):
        return lin_const(e.value)
    if isinstance(e, Var):
        return (0, ((("v", e.name), 1),))
    if isinstance(e, Add):
        return lin_add(lin_of_aexpr(e.left), lin_of_aexpr(e.right))
    if isinstance(e, Sub):
        return lin_add(lin_of_aexpr(e.left), lin_neg(lin_of_aexpr(e.right)))
    if isinstance(e, Mul):
        return lin_scale(e.coeff, lin_of_aexpr(e.arg))
    if isinstance(e, Mod):
        return _mod_form(lin_of_aexpr(e.arg), e.modulus)
    raise TypeError(f"not an arithmetic expression: {e!r}")


def _atom_aexpr(atom) -> AExpr:
    if atom[0] == "v":
        return Var(atom[1])
    return Mod(aexpr_of_lin(atom[1]), atom[2])


def _term_aexpr(atom, coeff: int) -> AExpr:
    base = _atom_aexpr(atom)
    return base if coeff == 1 else Mul(coeff, base)


def aexpr_of_lin(lf: LinForm) -> AExpr:
    const, terms = lf
    pos = [(a, c) for a, c in terms if c > 0]
    neg = [(a, -c) for a, c in terms if c < 0]
    expr: Optional[AExpr] = None
    if pos:
        for a, c in pos:
            t = _term_aexpr(a, c)
            expr = t if expr is None else Add(expr, t)
    elif const != 0 or not neg:
        expr = IntLit(const)
        const = 0
    else:
        a, c = neg.pop(0)
        expr = _term_aexpr(a, -c) if c > 1 else Mul(-1, _atom_aexpr(a))
        if c > 1:
            expr = Mul(-c, _atom_aexpr(a))
    for a, c in neg:
        expr = Sub(expr, _term_aexpr(a, c))
    if const > 0:
        expr = Add(expr, IntLit(const))
    elif const < 0:
        expr = Sub(expr, IntLit(-const))
    return expr


def lin_fv(lf: LinForm) -> frozenset[str]:
    out: set[str] = set()
    for atom, _ in lf[1]:
        if atom[0] == "v":
            out.add(atom[1])
        else:
            out |= lin_fv(atom[1])
    return frozenset(out)


def lin_var_coeff(lf: LinForm, v: str) -> int:
    for atom, c in lf[1]:
        if atom == ("v", v):
            return c
    return 0


def lin_var_in_mods(lf: LinForm, v: str) -> bool:
    return any(atom[0] == "m" and v in lin_fv(atom[1]) for atom, _ in lf[1])


def lin_subst_const(lf: LinForm, v: str, val: int) -> LinForm:
    const = lf[0]
    terms: dict = {}
    for atom, c in lf[1]:
        if atom == ("v", v):
            const += c * val
            continue
        if atom[0] == "m" and v in lin_fv(atom[1]):
            inner = lin_subst_const(atom[1], v, val)
            sub = lin_scale(c, _mod_form(inner, atom[2]))
            const += sub[0]
            for a2, c2 in sub[1]:
                terms[a2] = terms.get(a2, 0) + c2
            continue
        terms[atom] = terms.get(atom, 0) + c
    return _mk_lin(const, terms)


# ---------------------------------------------------------------------------
# Normalized guards
#
# NB = ('t',) | ('f',) | ('cmp', op, linform) with op in {'le','eq','ne'}
#    | ('and', members) | ('or', members), members a sorted tuple of NB.
# ('cmp','le',lf) means lf <= 0, 'eq' means lf = 0, 'ne' means lf != 0.
# ---------------------------------------------------------------------------

NB = tuple
NB_TRUE: NB = ("t",)
NB_FALSE: NB = ("f",)


@functools.lru_cache(maxsize=1 << 18)
def _nb_sort_key(nb: NB) -> str:
    return repr(nb)


def _canon_cmp_lin(op: str, lf: LinForm) -> NB:
    if op == ">":
        lf = lin_neg(lf)
        op = "<"
    elif op == ">=":
        lf = lin_neg(lf)
        op = "<="
    if op == "<":
        lf = lin_shift(lf, 1)
        op = "<="
    if lin_is_const(lf):
        c = lf[0]
        if op == "<=":
            return NB_TRUE if c <= 0 else NB_FALSE
        if op == "=":
            return NB_TRUE if c == 0 else NB_FALSE
        return NB_TRUE if c != 0 else NB_FALSE
    if op in ("=", "!="):
        if lf[1][0][1] < 0:
            lf = lin_neg(lf)
        return ("cmp", "eq" if op == "=" else "ne", lf)
    return ("cmp", "le", lf)


_DUAL_OP = {"<": ">=", "<=": ">", "=": "!=", "!=": "=", ">=": "<", ">": "<="}


def norm_cmp(left: AExpr, op: str, right: AExpr) -> NB:
    diff = lin_add(lin_of_aexpr(left), lin_neg(lin_of_aexpr(right)))
    return _canon_cmp_lin(op, diff)


def nb_not(nb: NB) -> NB:
    if nb == NB_TRUE:
        return NB_FALSE
    if nb == NB_FALSE:
        return NB_TRUE
    if nb[0] == "cmp":
        op, lf = nb[1], nb[2]
        if op == "le":
            # not (lf <= 0)  <=>  -lf + 1 <= 0
            return _canon_cmp_lin("<=", lin_shift(lin_neg(lf), 1))
        if op == "eq":
            return ("cmp", "ne", lf)
        return ("cmp", "eq", lf)
    if nb[0] == "and":
        return nb_or([nb_not(m) for m in nb[1]])
    return nb_and([nb_not(m) for m in nb[1]])


def _nb_subst(nb: NB, v: str, val: int) -> NB:
    if nb in (NB_TRUE, NB_FALSE):
        return nb
    if nb[0] == "cmp":
        op, lf = nb[1], nb[2]
        raw = {"le": "<=", "eq": "=", "ne": "!="}[op]
        return _canon_cmp_lin(raw, lin_subst_const(lf, v, val))
    if nb[0] == "and":
        return nb_and([_nb_subst(m, v, val) for m in nb[1]])
    return nb_or([_nb_subst(m, v, val) for m in nb[1]])


def _cmp_implies(a: NB, b: NB) -> bool:
    """Does comparison ``a`` imply comparison ``b``?  Complete for comparisons
    over the same linear part (in either orientation); False otherwise."""
    opa, (ca, ta) = a[1], a[2]
    opb, (cb, tb) = b[1], b[2]
    if ta == tb:
        va, vb = -ca, -cb
        if opa == "le":
            return (opb == "le" and va <= vb) or (opb == "ne" and vb > va)
        if opa == "eq":
            if opb == "le":
                return va <= vb
            if opb == "eq":
                return va == vb
            return va != vb
        return opb == "ne" and va == vb
    if opa == "eq" and opb == "le" and tb == lin_neg((0, ta))[1]:
        # a pins the value of the consequent's negated linear part
        return ca <= -cb
    return False


@functools.lru_cache(maxsize=1 << 18)
def _entails(a: NB, b: NB) -> bool:
    """Sound (not complete) entailment between normalized guards."""
    if a == NB_FALSE or b == NB_TRUE:
        return True
    if a == NB_TRUE or b == NB_FALSE:
        return False
    if _nb_sort_key(a) == _nb_sort_key(b):
        return True
    if a[0] == "or":
        return all(_entails(m, b) for m in a[1])
    if b[0] == "and":
        return all(_entails(a, m) for m in b[1])
    if a[0] == "and":
        return any(_entails(m, b) for m in a[1])
    if b[0] == "or":
        return any(_entails(a, m) for m in b[1])
    return _cmp_implies(a, b)


def _absorb_or(members: list[NB]) -> list[NB]:
    """Drop disjuncts entailed by another disjunct."""
    out = []
    for i, mi in enumerate(members):
        dropped = False
        for j, mj in enumerate(members):
            if i != j and _entails(mi, mj) and (j < i or not _entails(mj, mi)):
                dropped = True
                break
        if not dropped:
            out.append(mi)
    return out


def _absorb_and(members: list[NB]) -> list[NB]:
    """Drop conjuncts entailed by another conjunct."""
    out = []
    for i, mi in enumerate(members):
        dropped = False
        for j, mj in enumerate(members):
            if i != j and _entails(mj, mi) and (j < i or not _entails(mi, mj)):
                dropped = True
                break
        if not dropped:
            out.append(mi)
    return out


def _merge_cmps_and(cmps: list[NB]) -> Optional[list[NB]]:
    """Conjunctive same-linear-part merging; None means contradiction."""
    groups: dict = {}
    for _, op, lf in cmps:
        const, terms = lf
        g = groups.setdefault(terms, {"le": None, "eq": set(), "ne": set()})
        if op == "le":
            b = -const
            g["le"] = b if g["le"] is None else min(g["le"], b)
        elif op == "eq":
            g["eq"].add(-const)
        else:
            g["ne"].add(-const)

    # upper bounds per terms-part for cross-group reasoning
    upper: dict = {}
    exact: dict = {}
    for terms, g in groups.items():
        if len(g["eq"]) > 1:
            return None
        if g["eq"]:
            v = next(iter(g["eq"]))
            if g["le"] is not None and v > g["le"]:
                return None
            if v in g["ne"]:
                return None
            exact[terms] = v
            upper[terms] = v
        elif g["le"] is not None:
            upper[terms] = g["le"]

    out: list[NB] = []
    handled_pairs: set = set()
    for terms, g in groups.items():
        neg_terms = lin_neg((0, terms))[1]
        lo = None
        if neg_terms in upper:
            lo = -upper[neg_terms]
        b = g["le"]
        if terms in exact:
            v = exact[terms]
            if lo is not None and v < lo:
                return None
            out.append(("cmp", "eq", (-v, terms)) if terms[0][1] > 0
                       else ("cmp", "eq", lin_neg((-v, terms))))
            continue
        if neg_terms in exact:
            # the other orientation pins this group's value exactly
            tval = -exact[neg_terms]
            if b is not None and tval > b:
                return None
            if tval in g["ne"]:
                return None
            continue
        if b is not None and lo is not None:
            if lo > b:
                return None
            if lo == b:
                # the two bounds meet: collapse to an equality (once per pair)
                if b in g["ne"]:
                    return None
                key = min(repr(terms), repr(neg_terms))
                if key in handled_pairs:
                    continue
                handled_pairs.add(key)
                lf = (-b, terms)
                if terms[0][1] < 0:
                    lf = lin_neg(lf)
                out.append(("cmp", "eq", lf))
                continue
        if b is not None:
            out.append(("cmp", "le", (-b, terms)))
        for n in sorted(g["ne"]):
            if b is not None and n > b:
                continue
            if lo is not None and n < lo:
                continue
            out.append(("cmp", "ne", (-n, terms)) if terms[0][1] > 0
                       else ("cmp", "ne", lin_neg((-n, terms))))
    return out


def _merge_cmps_or(cmps: list[NB]) -> Optional[list[NB]]:
    """Disjunctive same-linear-part merging; None means tautology."""
    groups: dict = {}
    for _, op, lf in cmps:
        const, terms = lf
        g = groups.setdefault(terms, {"le": None, "eq": set(), "ne": set()})
        if op == "le":
            b = -const
            g["le"] = b if g["le"] is None else max(g["le"], b)
        elif op == "eq":
            g["eq"].add(-const)
        else:
            g["ne"].add(-const)

    upper: dict = {}
    for terms, g in groups.items():
        if g["le"] is not None:
            upper[terms] = g["le"]

    out: list[NB] = []
    for terms, g in groups.items():
        b = g["le"]
        if len(g["ne"]) > 1:
            return None
        if g["ne"]:
            n = next(iter(g["ne"]))
            if b is not None and n <= b:
                return None
            if n in g["eq"]:
                return None
            out.append(("cmp", "ne", (-n, terms)) if terms[0][1] > 0
                       else ("cmp", "ne", lin_neg((-n, terms))))
            continue
        neg_terms = lin_neg((0, terms))[1]
        if b is not None and neg_terms in upper:
            # T <= b or T >= -upper[negT]: covers the integers when the
            # ranges meet or overlap
            if -upper[neg_terms] <= b + 1:
                return None
        if b is not None:
            out.append(("cmp", "le", (-b, terms)))
        for v in sorted(g["eq"]):
            if b is not None and v <= b:
                continue
            out.append(("cmp", "eq", (-v, terms)) if terms[0][1] > 0
                       else ("cmp", "eq", lin_neg((-v, terms))))
    return out


def _clause_atoms(nb: NB) -> Optional[tuple]:
    if nb[0] == "cmp":
        return (nb,)
    if nb[0] == "and" and all(m[0] == "cmp" for m in nb[1]):
        return nb[1]
    return None


def _pos_terms(terms: tuple) -> tuple[tuple, bool]:
    if terms[0][1] > 0:
        return terms, False
    return lin_neg((0, terms))[1], True


def _clause_interval(atoms: tuple, post: tuple) -> Optional[tuple]:
    """Split a conjunctive clause into the integer interval it imposes on
    the linear term ``post`` and the remaining atoms; None lo/hi means
    unbounded on that side, an overall None an empty clause."""
    lo = hi = None
    rest: list[NB] = []
    for a in atoms:
        op, (const, terms) = a[1], a[2]
        if not terms or op == "ne":
            rest.append(a)
            continue
        pt, flipped = _pos_terms(terms)
        if pt != post:
            rest.append(a)
            continue
        if op == "eq":
            v = const if flipped else -const
            lo = v if lo is None else max(lo, v)
            hi = v if hi is None else min(hi, v)
        elif flipped:
            lo = const if lo is None else max(lo, const)
        else:
            hi = -const if hi is None else min(hi, -const)
    if lo is not None and hi is not None and lo > hi:
        return None
    return lo, hi, rest


def _interval_atoms(lo, hi, post: tuple) -> list[NB]:
    if lo is not None and lo == hi:
        return [("cmp", "eq", _mk_lin(-lo, dict(post)))]
    out: list[NB] = []
    if hi is not None:
        out.append(("cmp", "le", _mk_lin(-hi, dict(post))))
    if lo is not None:
        out.append(("cmp", "le", _mk_lin(lo, dict(lin_neg((0, post))[1]))))
    return out


def _merge_or_clauses(items: list[NB]) -> Optional[list[NB]]:
    """Union adjacent or overlapping intervals across disjuncts that agree
    on everything else, so that unrolled guards close up instead of piling
    one disjunct per step; None means the union covers all states."""
    clauses: list[tuple] = []
    out: list[NB] = []
    for it in items:
        atoms = _clause_atoms(it)
        if atoms is None:
            out.append(it)
        else:
            clauses.append(atoms)
    changed = True
    while changed:
        changed = False
        buckets: dict = {}
        for idx, atoms in enumerate(clauses):
            cands = set()
            for a in atoms:
                if a[1] != "ne" and a[2][1]:
                    cands.add(_pos_terms(a[2][1])[0])
            for post in cands:
                parsed = _clause_interval(atoms, post)
                if parsed is None:
                    continue
                lo, hi, rest = parsed
                key = (post, tuple(sorted(_nb_sort_key(r) for r in rest)))
                buckets.setdefault(key, []).append((idx, lo, hi, rest))
        for (post, _), entries in buckets.items():
            if len(entries) < 2:
                continue
            ivs = sorted(((lo, hi) for _, lo, hi, _ in entries),
                         key=lambda p: (p[0] is not None, p[0] or 0))
            pieces = [ivs[0]]
            for lo, hi in ivs[1:]:
                plo, phi = pieces[-1]
                if phi is None or lo is None or lo <= phi + 1:
                    top = None if phi is None or hi is None else max(phi, hi)
                    pieces[-1] = (plo, top)
                else:
                    pieces.append((lo, hi))
            if len(pieces) >= len(entries):
                continue
            rest = entries[0][3]
            rebuilt = []
            for lo, hi in pieces:
                atoms2 = _interval_atoms(lo, hi, post) + list(rest)
                if not atoms2:
                    return None
                rebuilt.append(tuple(sorted(atoms2, key=_nb_sort_key)))
            drop = {idx for idx, *_ in entries}
            clauses = [c for i, c in enumerate(clauses) if i not in drop]
            clauses.extend(rebuilt)
            changed = True
            break
    for atoms in clauses:
        out.append(atoms[0] if len(atoms) == 1 else ("and", atoms))
    return out


def nb_and(members: Iterable[NB]) -> NB:
    items: list[NB] = []
    work = list(members)
    while work:
        m = work.pop()
        if m == NB_TRUE:
            continue
        if m == NB_FALSE:
            return NB_FALSE
        if m[0] == "and":
            work.extend(m[1])
            continue
        items.append(m)
    # deduplicate
    seen = set()
    uniq = []
    for m in sorted(items, key=_nb_sort_key):
        k = _nb_sort_key(m)
        if k not in seen:
            seen.add(k)
            uniq.append(m)
    items = uniq

    # single-variable equality pinning
    pinned: set[str] = set()
    changed = True
    while changed:
        changed = False
        for m in items:
            if m[0] != "cmp" or m[1] != "eq":
                continue
            const, terms = m[2]
            if len(terms) != 1:
                continue
            atom, coeff = terms[0]
            if atom[0] != "v" or coeff not in (1, -1):
                continue
            v = atom[1]
            if v in pinned:
                continue
            val = -const if coeff == 1 else const
            pinned.add(v)
            rest = [_nb_subst(o, v, val) for o in items if o is not m]
            if any(o == NB_FALSE for o in rest):
                return NB_FALSE
            flat: list[NB] = [m]
            for o in rest:
                if o == NB_TRUE:
                    continue
                if o[0] == "and":
                    flat.extend(o[1])
                else:
                    flat.append(o)
            items = flat
            changed = True
            break

    # distribute over small disjunctions so iterates reach a flat
    # or-of-conjunctions shape that absorption can compare
    size = 1
    for m in items:
        if m[0] == "or":
            size *= len(m[1])
    if size > 1 and size <= 64:
        choices = [m[1] if m[0] == "or" else (m,) for m in items]
        return nb_or([nb_and(combo) for combo in itertools.product(*choices)])

    cmps = [m for m in items if m[0] == "cmp"]
    others = [m for m in items if m[0] != "cmp"]
    merged = _merge_cmps_and(cmps)
    if merged is None:
        return NB_FALSE
    items = merged + others
    items = _absorb_and(items)
    items = sorted(items, key=_nb_sort_key)
    # re-deduplicate after merging
    out = []
    last = None
    for m in items:
        k = _nb_sort_key(m)
        if k != last:
            out.append(m)
            last = k
    if not out:
        return NB_TRUE
    if len(out) == 1:
        return out[0]
    return ("and", tuple(out))


def nb_or(members: Iterable[NB]) -> NB:
    items: list[NB] = []
    work = list(members)
    while work:
        m = work.pop()
        if m == NB_FALSE:
            continue
        if m == NB_TRUE:
            return NB_TRUE
        if m[0] == "or":
            work.extend(m[1])
            continue
        items.append(m)
    seen = set()
    uniq = []
    for m in sorted(items, key=_nb_sort_key):
        k = _nb_sort_key(m)
        if k not in seen:
            seen.add(k)
            uniq.append(m)
    items = uniq

    cmps = [m for m in items if m[0] == "cmp"]
    others = [m for m in items if m[0] != "cmp"]
    merged = _merge_cmps_or(cmps)
    if merged is None:
        return NB_TRUE
    items = merged + others
    items = _absorb_or(items)
    folded = _merge_or_clauses(items)
    if folded is None:
        return NB_TRUE
    items = _absorb_or(folded)
    items = sorted(items, key=_nb_sort_key)
    out = []
    last = None
    for m in items:
        k = _nb_sort_key(m)
        if k != last:
            out.append(m)
            last = k
    if not out:
        return NB_FALSE
    if len(out) == 1:
        return out[0]
    return ("or", tuple(out))


def norm_bexpr_nb(b: BExpr, neg: bool = False) -> NB:
    if isinstance(b, BoolLit):
        return NB_TRUE if (b.value != neg) else NB_FALSE
    if isinstance(b, Not):
        return norm_bexpr_nb(b.arg, not neg)
    if isinstance(b, And):
        parts = [norm_bexpr_nb(b.left, neg), norm_bexpr_nb(b.right, neg)]
        return nb_or(parts) if neg else nb_and(parts)
    if isinstance(b, Or):
        parts = [norm_bexpr_nb(b.left, neg), norm_bexpr_nb(b.right, neg)]
        return nb_and(parts) if neg else nb_or(parts)
    if isinstance(b, Cmp):
        op = _DUAL_OP[b.op] if neg else b.op
        return norm_cmp(b.left, op, b.right)
    raise TypeError(f"not a guard: {b!r}")


def _cmp_ast(op: str, lf: LinForm) -> BExpr:
    const, terms = lf
    pos = tuple((a, c) for a, c in terms if c > 0)
    neg = tuple((a, -c) for a, c in terms if c < 0)
    ast_op = {"le": "<=", "eq": "=", "ne": "!="}[op]
    if not pos:
        # -N + c <= 0  ==>  N >= c
        left = aexpr_of_lin((0, neg))
        right = aexpr_of_lin((const, ()))
        flipped = {"<=": ">=", "=": "=", "!=": "!="}[ast_op]
        return Cmp(left, flipped, right)
    left = aexpr_of_lin((0, pos))
    right = aexpr_of_lin((-const, neg))
    return Cmp(left, ast_op, right)


def bexpr_of_nb(nb: NB) -> BExpr:
    if nb == NB_TRUE:
        return BoolLit(True)
    if nb == NB_FALSE:
        return BoolLit(False)
    if nb[0] == "cmp":
        return _cmp_ast(nb[1], nb[2])
    ctor = And if nb[0] == "and" else Or
    members = [bexpr_of_nb(m) for m in nb[1]]
    out = members[0]
    for m in members[1:]:
        out = ctor(out, m)
    return out


def normalize_bexpr(b: BExpr) -> BExpr:
    return bexpr_of_nb(norm_bexpr_nb(b))


# ---------------------------------------------------------------------------
# Quantities
# ---------------------------------------------------------------------------


def _mk_arith(lf: LinForm) -> Quantity:
    if lin_is_const(lf):
        return Const(ExtReal(lf[0]))
    return Arith(aexpr_of_lin(lf))


def _mk_iverson(nb: NB) -> Quantity:
    if nb == NB_TRUE:
        return Const(POS_INF)
    if nb == NB_FALSE:
        return Const(NEG_INF)
    return Iverson(bexpr_of_nb(nb))


def _flatten(q: Quantity, cls) -> list[Quantity]:
    if isinstance(q, cls):
        return _flatten(q.left, cls) + _flatten(q.right, cls)
    return [q]


def _rebuild(members: list[Quantity], ctor) -> Quantity:
    members = sorted(members, key=quantity_key)
    out = members[-1]
    for m in reversed(members[:-1]):
        out = ctor(m, out)
    return out


def _lattice_absorb(members: list[Quantity], dual_cls) -> list[Quantity]:
    """In a min list, drop max-members whose member set contains another
    member of the min list (and dually)."""
    def member_keys(m: Quantity) -> frozenset[str]:
        if isinstance(m, dual_cls):
            return frozenset(quantity_key(x) for x in _flatten(m, dual_cls))
        return frozenset({quantity_key(m)})

    sets = [(member_keys(m), m) for m in members]
    out = []
    for i, (si, mi) in enumerate(sets):
        dropped = False
        for j, (sj, _) in enumerate(sets):
            if i == j:
                continue
            if sj < si or (sj == si and j < i):
                dropped = True
                break
        if not dropped:
            out.append(mi)
    return out


def _mk_minmax(members: list[Quantity], is_min: bool) -> Quantity:
    identity = POS_INF if is_min else NEG_INF
    absorbing = NEG_INF if is_min else POS_INF
    cls = QMin if is_min else QMax
    dual_cls = QMax if is_min else QMin

    flat: list[Quantity] = []
    for m in members:
        flat.extend(_flatten(m, cls))

    consts: list[ExtReal] = []
    ivs: list[NB] = []
    rest: list[Quantity] = []
    for m in flat:
        if isinstance(m, Const):
            consts.append(m.value)
        elif isinstance(m, Iverson):
            ivs.append(norm_bexpr_nb(m.cond))
        else:
            rest.append(m)

    folded = identity
    for c in consts:
        folded = min(folded, c) if is_min else max(folded, c)
    if folded == absorbing:
        return Const(absorbing)

    if ivs:
        merged = nb_and(ivs) if is_min else nb_or(ivs)
        iv = _mk_iverson(merged)
        if isinstance(iv, Const):
            if iv.value == absorbing:
                return Const(absorbing)
            # identity: contributes nothing
        else:
            rest.append(iv)

    if folded != identity:
        rest.append(Const(folded))

    # dedupe
    seen: set[str] = set()
    uniq: list[Quantity] = []
    for m in sorted(rest, key=quantity_key):
        k = quantity_key(m)
        if k not in seen:
            seen.add(k)
            uniq.append(m)

    uniq = _lattice_absorb(uniq, dual_cls)

    if not uniq:
        return Const(identity)
    if len(uniq) == 1:
        return uniq[0]
    return _rebuild(uniq, cls)


def _mk_min(members: list[Quantity]) -> Quantity:
    return _mk_minmax(members, True)


def _mk_max(members: list[Quantity]) -> Quantity:
    return _mk_minmax(members, False)


def _mk_add(members: list[Quantity]) -> Quantity:
    flat: list[Quantity] = []
    for m in members:
        flat.extend(_flatten(m, QAdd))

    consts: list[ExtReal] = []
    lin: Optional[LinForm] = None
    rest: list[Quantity] = []
    for m in flat:
        if isinstance(m, Const):
            consts.append(m.value)
        elif isinstance(m, Arith):
            lf = lin_of_aexpr(m.expr)
            lin = lf if lin is None else lin_add(lin, lf)
        else:
            rest.append(m)

    pos = any(c.is_pos_inf for c in consts)
    neg = any(c.is_neg_inf for c in consts)
    if pos and neg:
        # indeterminate: keep both infinities so evaluation reports it
        out = rest + [Const(POS_INF), Const(NEG_INF)]
        if lin is not None:
            out.append(_mk_arith(lin))
        return _rebuild(out, QAdd) if len(out) > 1 else out[0]

    const_sum = ExtReal(0)
    for c in consts:
        const_sum = const_sum + c

    if not const_sum.is_finite:
        # an infinite constant absorbs finite-valued arithmetic summands
        lin = None
        if not rest:
            return Const(const_sum)
        return _rebuild(rest + [Const(const_sum)], QAdd)

    if lin is not None and const_sum.finite.denominator == 1:
        lin = lin_shift(lin, int(const_sum.finite))
        const_sum = ExtReal(0)

    out: list[Quantity] = list(rest)
    if lin is not None:
        arith = _mk_arith(lin)
        if not (isinstance(arith, Const) and arith.value == ExtReal(0)):
            out.append(arith)
    if const_sum != ExtReal(0) or not out:
        out.append(Const(const_sum))
    if len(out) == 1:
        return out[0]
    return _rebuild(out, QAdd)


def _mk_scale(r: Fraction, q: Quantity) -> Quantity:
    if r == 0:
        return Const(ExtReal(0))
    if r == 1:
        return q
    if isinstance(q, Const):
        return Const(q.value.scale(r))
    if isinstance(q, QScale):
        return _mk_scale(r * q.factor, q.arg)
    if isinstance(q, Iverson):
        # r > 0 preserves both infinities
        return q
    if isinstance(q, Arith) and r.denominator == 1:
        return _mk_arith(lin_scale(int(r), lin_of_aexpr(q.expr)))
    return QScale(r, q)


def _mk_neg(q: Quantity) -> Quantity:
    if isinstance(q, Const):
        return Const(-q.value)
    if isinstance(q, Arith):
        return _mk_arith(lin_neg(lin_of_aexpr(q.expr)))
    if isinstance(q, Iverson):
        return _mk_iverson(nb_not(norm_bexpr_nb(q.cond)))
    if isinstance(q, QMin):
        return _mk_max([_mk_neg(m) for m in _flatten(q, QMin)])
    if isinstance(q, QMax):
        return _mk_min([_mk_neg(m) for m in _flatten(q, QMax)])
    if isinstance(q, QAdd):
        return _mk_add([_mk_neg(m) for m in _flatten(q, QAdd)])
    if isinstance(q, QScale):
        return _mk_scale(q.factor, _mk_neg(q.arg))
    if isinstance(q, QNeg):
        return q.arg
    if isinstance(q, Sup):
        return _mk_inf(q.var, _mk_neg(q.body))
    if isinstance(q, Inf):
        return _mk_sup(q.var, _mk_neg(q.body))
    raise TypeError(f"not a quantity: {q!r}")


def _solve_member(members: list[Quantity], v: str, want_op: str
                  ) -> Optional[tuple[AExpr, list[Quantity]]]:
    """Find an indicator member pinning ``v`` via an (in)equality with unit
    coefficient; return the solved witness and the remaining members."""
    for idx, m in enumerate(members):
        if not isinstance(m, Iverson):
            continue
        nb = norm_bexpr_nb(m.cond)
        if nb[0] != "cmp" or nb[1] != want_op:
            continue
        lf = nb[2]
        coeff = lin_var_coeff(lf, v)
        if coeff not in (1, -1) or lin_var_in_mods(lf, v):
            continue
        rest_lf = lin_add(lf, ((0, ((("v", v), -coeff),))))
        sol_lf = lin_neg(rest_lf) if coeff == 1 else rest_lf
        if v in lin_fv(sol_lf):
            continue
        witness = aexpr_of_lin(sol_lf)
        rest = members[:idx] + members[idx + 1:]
        return witness, rest
    return None


def _split_iversons(members: list[Quantity], shape: str) -> list[Quantity]:
    """Split indicator members along the lattice operation they sit in:
    [p && q] is [p] min [q], [p || q] is [p] max [q]."""
    out: list[Quantity] = []
    for m in members:
        if isinstance(m, Iverson):
            nb = norm_bexpr_nb(m.cond)
            if nb[0] == shape:
                out.extend(_mk_iverson(c) for c in nb[1])
                continue
        out.append(m)
    return out


def _linear_in(q: Quantity, v: str) -> Optional[int]:
    """The nonzero linear coefficient of ``v`` in an arithmetic or comparison
    member, provided ``v`` stays out of remainder atoms; None otherwise."""
    if isinstance(q, Arith):
        lf = lin_of_aexpr(q.expr)
    elif isinstance(q, Iverson):
        nb = norm_bexpr_nb(q.cond)
        if nb[0] != "cmp":
            return None
        lf = nb[2]
    else:
        return None
    c = lin_var_coeff(lf, v)
    if c == 0 or lin_var_in_mods(lf, v):
        return None
    return c


def _quant_fold(members: list[Quantity], v: str, is_sup: bool
                ) -> Optional[Quantity]:
    """Fold a quantifier over binder-dependent members once equality
    elimination has failed: unbounded linear members, satisfiable
    single-comparison indicators, and the one-bound linear case."""
    extreme = Const(POS_INF if is_sup else NEG_INF)
    if len(members) == 1:
        m = members[0]
        if isinstance(m, Arith) and _linear_in(m, v) is not None:
            return extreme
        if isinstance(m, Iverson):
            nb = norm_bexpr_nb(m.cond)
            if nb[0] == "cmp" and _linear_in(m, v) is not None:
                # Sup: the indicator hits +inf whenever the comparison has an
                # integer solution; Inf: -inf whenever the complement has one
                ok = ("le", "ne") if is_sup else ("le", "eq")
                if nb[1] in ok:
                    return extreme
        return None
    if len(members) != 2:
        return None
    ivs = [m for m in members if isinstance(m, Iverson)]
    ars = [m for m in members if isinstance(m, Arith)]
    if len(ivs) != 1 or len(ars) != 1:
        return None
    k = _linear_in(ars[0], v)
    nb = norm_bexpr_nb(ivs[0].cond)
    if k is None or nb[0] != "cmp":
        return None
    # Sup ranges over the indicator's region (it sits in a min); Inf over the
    # complement (it sits in a max, where the indicator is -inf).
    puncture = "ne" if is_sup else "eq"
    if nb[1] == puncture and _linear_in(ivs[0], v) is not None:
        # region misses one hyperplane: the linear member is still unbounded
        return extreme
    if nb[1] != "le":
        return None
    region = nb[2] if is_sup else lin_shift(lin_neg(nb[2]), 1)
    c = lin_var_coeff(region, v)
    if c not in (1, -1) or lin_var_in_mods(region, v):
        return None
    upper = c == 1
    attained = (k > 0) == upper if is_sup else (k > 0) != upper
    if attained:
        # bound on the approached side: the extremum sits at the boundary
        rest = lin_add(region, (0, ((("v", v), -c),)))
        witness = aexpr_of_lin(lin_neg(rest) if c == 1 else rest)
        return simplify(subst_quantity(ars[0], v, witness))
    return extreme


def _mk_sup(v: str, body: Quantity) -> Quantity:
    if v not in fv_quantity(body):
        return body
    if isinstance(body, QMax):
        return _mk_max([_mk_sup(v, m) for m in _flatten(body, QMax)])
    if isinstance(body, QScale):
        return _mk_scale(body.factor, _mk_sup(v, body.arg))
    members = _flatten(body, QMin) if isinstance(body, QMin) else [body]
    members = _split_iversons(members, "and")
    free = [m for m in members if v not in fv_quantity(m)]
    dep = [m for m in members if v in fv_quantity(m)]
    if free:
        inner = dep[0] if len(dep) == 1 else _mk_min(dep)
        return _mk_min(free + [_mk_sup(v, inner)])
    solved = _solve_member(members, v, "eq")
    if solved is not None:
        witness, rest = solved
        substituted = [simplify(subst_quantity(m, v, witness)) for m in rest]
        if not substituted:
            return Const(POS_INF)
        return _mk_min(substituted)
    folded = _quant_fold(members, v, True)
    if folded is not None:
        return folded
    return Sup(v, body)


def _mk_inf(v: str, body: Quantity) -> Quantity:
    if v not in fv_quantity(body):
        return body
    if isinstance(body, QMin):
        return _mk_min([_mk_inf(v, m) for m in _flatten(body, QMin)])
    if isinstance(body, QScale):
        return _mk_scale(body.factor, _mk_inf(v, body.arg))
    members = _flatten(body, QMax) if isinstance(body, QMax) else [body]
    members = _split_iversons(members, "or")
    free = [m for m in members if v not in fv_quantity(m)]
    dep = [m for m in members if v in fv_quantity(m)]
    if free:
        inner = dep[0] if len(dep) == 1 else _mk_max(dep)
        return _mk_max(free + [_mk_inf(v, inner)])
    solved = _solve_member(members, v, "ne")
    if solved is not None:
        witness, rest = solved
        substituted = [simplify(subst_quantity(m, v, witness)) for m in rest]
        if not substituted:
            return Const(NEG_INF)
        return _mk_max(substituted)
    folded = _quant_fold(members, v, False)
    if folded is not None:
        return folded
    return Inf(v, body)


def simplify(q: Quantity) -> Quantity:
    """Normalize a quantity.  Semantics-preserving for every state; see the
    module docstring for the window obligation of the quantifier rules."""
    if isinstance(q, Const):
        return q
    if isinstance(q, Arith):
        return _mk_arith(lin_of_aexpr(q.expr))
    if isinstance(q, Iverson):
        return _mk_iverson(norm_bexpr_nb(q.cond))
    if isinstance(q, QMin):
        return _mk_min([simplify(m) for m in _flatten(q, QMin)])
    if isinstance(q, QMax):
        return _mk_max([simplify(m) for m in _flatten(q, QMax)])
    if isinstance(q, QAdd):
        return _mk_add([simplify(m) for m in _flatten(q, QAdd)])
    if isinstance(q, QScale):
        return _mk_scale(q.factor, simplify(q.arg))
    if isinstance(q, QNeg):
        return _mk_neg(simplify(q.arg))
    if isinstance(q, Sup):
        return _mk_sup(q.var, simplify(q.body))
    if isinstance(q, Inf):
        return _mk_inf(q.var, simplify(q.body))
    raise TypeError(f"not a quantity: {q!r}")


# ---------------------------------------------------------------------------
# Guard-context collapse
# ---------------------------------------------------------------------------


def _under_ctx(q: Quantity, ctx: NB) -> Quantity:
    """Rewrite ``q`` assuming ``ctx`` holds; the result agrees with ``q``
    on every state satisfying ``ctx``. Only pure lattice structure is
    walked, so the rewrite cannot introduce sums of opposite infinities
    anywhere."""
    if ctx == NB_FALSE:
        return q
    if isinstance(q, Iverson):
        nb = norm_bexpr_nb(q.cond)
        if nb_and([ctx, nb]) == NB_FALSE:
            return Const(NEG_INF)
        if _entails(ctx, nb):
            return Const(POS_INF)
        return q
    if isinstance(q, (QMin, QMax)):
        is_min = isinstance(q, QMin)
        members = _flatten(q, QMin if is_min else QMax)
        brackets = [norm_bexpr_nb(m.cond) for m in members
                    if isinstance(m, Iverson)]
        if is_min:
            # Where any bracket fails the min is -inf regardless of the
            # other members, so they may assume every bracket.
            inner = nb_and([ctx] + brackets)
            if inner == NB_FALSE:
                return Const(NEG_INF)
        else:
            # Where any bracket holds the max is +inf, so the other
            # members may assume every bracket fails.
            inner = nb_and([ctx] + [nb_not(b) for b in brackets])
            if inner == NB_FALSE:
                return Const(POS_INF)
        rebuilt = [m if isinstance(m, Iverson) else _under_ctx(m, inner)
                   for m in members]
        return (_mk_min if is_min else _mk_max)(rebuilt)
    if isinstance(q, Sup):
        return _mk_sup(q.var, _under_ctx(q.body, ctx))
    if isinstance(q, Inf):
        return _mk_inf(q.var, _under_ctx(q.body, ctx))
    return q


def collapse_guards(q: Quantity) -> Quantity:
    """Resolve Iverson brackets against the brackets of enclosing min and
    max layers. Loop unrolling nests guarded branches one level deeper
    each iteration; collapsing entailed and contradicted brackets lets
    consecutive iterates reach a common form, which plain bottom-up
    normalization cannot see because the facts live across nesting
    levels. Expects and preserves normalized quantities."""
    return _under_ctx(q, NB_TRUE)
