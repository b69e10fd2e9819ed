"""Randomized property suites for the transformer laws.

Each suite draws seeded instances from :mod:`quantgcl.generators` and
checks one law of the calculus, either against the collecting reference
semantics or by comparing two symbolic results pointwise over the
instance's domain box. A falsification means the law failed on a
concrete instance; an inconclusive instance means a transform was
truncated before convergence, so no verdict was possible. Loop-free
programs always transform exactly, so inconclusive counts can only come
from the loop suite.

The laws covered:

* ``oracle``: symbolic transforms agree with the reference semantics on
  loop-free programs, all four modes, exactly.
* ``loops``: converged loop transforms agree with the reference.
* ``galois``: the adjunction pairs (wlp with sp, wp with slp) hold as
  biconditionals.
* ``duality``: wp(C, f) = -wlp(C, -f) and sp(C, f) = -slp(C, -f).
* ``strictness``: wp and sp map -inf to -inf; wlp and slp map +inf to
  +inf.
* ``monotonicity``: f below g implies t(f) below t(g) for all four t.
* ``conjunctiveness``: wp and sp commute with the max of a three-element
  set of quantities.
* ``disjunctiveness``: wlp and slp commute with the min of a
  three-element set.
* ``linearity``: wp and sp are sublinear, wlp and slp superlinear, for
  scale factors 0, 1, 2, and 1/2 over finite-valued quantities.
* ``embedding``: on Iverson-bracket inputs, sp and slp agree with the
  reference on all programs; wp and wlp agree on deterministic ones.
* ``deterministic``: on deterministic programs, wp and wlp coincide on
  every terminating input state and hit -inf / +inf on diverging ones.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional

from .generators import (
    ORACLE_PAD,
    SCALE_FACTORS,
    GenConfig,
    domain_for,
    gen_bounded_loop,
    gen_finite_quantity,
    gen_loop_free,
    gen_predicate,
    gen_quantity,
    gen_vars,
)
from .lattice import NEG_INF, POS_INF, ExtReal
from .oracle import EscapePolicy, collect, ref_slp, ref_sp, ref_wlp, ref_wp
from .syntax import (
    Const,
    DomainSpec,
    Iverson,
    Program,
    QAdd,
    QMax,
    QMin,
    QNeg,
    QScale,
    Quantity,
    State,
    eval_quantity,
    program_to_str,
    quantity_to_str,
)
from .transformers import Exact, Mode, TransformConfig, transform

__all__ = [
    "ALL_SUITES",
    "SuiteResult",
    "run_all",
    "run_suite",
    "suite_conjunctiveness",
    "suite_deterministic",
    "suite_disjunctiveness",
    "suite_duality",
    "suite_embedding",
    "suite_galois",
    "suite_linearity",
    "suite_loops",
    "suite_monotonicity",
    "suite_oracle",
    "suite_strictness",
]

_REF = {Mode.WP: ref_wp, Mode.WLP: ref_wlp, Mode.SP: ref_sp, Mode.SLP: ref_slp}


@dataclass(frozen=True)
class SuiteResult:
    name: str
    instances: int
    falsified: int
    inconclusive: int = 0
    first_failure: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.falsified == 0

    def summary_line(self) -> str:
        line = (f"{self.name}: {self.instances} instances, "
                f"{self.falsified} falsified")
        if self.inconclusive:
            line += f", {self.inconclusive} inconclusive"
        return line


def _cfg(dom: DomainSpec) -> TransformConfig:
    return TransformConfig(fuel=dom.fuel, probe=dom)


def _clip(text: str, width: int = 120) -> str:
    return text if len(text) <= width else text[: width - 3] + "..."


def _describe(i: int, c: Program, detail: str) -> str:
    return _clip(f"instance {i}: {detail} [program: {program_to_str(c)}]")


def _mismatch(states: Iterable[State],
              lhs: Callable[[State], ExtReal],
              rhs: Callable[[State], ExtReal]
              ) -> Optional[tuple[State, ExtReal, ExtReal]]:
    for s in states:
        va, vb = lhs(s), rhs(s)
        if va != vb:
            return s, va, vb
    return None


def _quantity_mismatch(qa: Quantity, qb: Quantity, dom: DomainSpec
                       ) -> Optional[tuple[State, ExtReal, ExtReal]]:
    return _mismatch(dom.states(),
                     lambda s: eval_quantity(qa, s, dom),
                     lambda s: eval_quantity(qb, s, dom))


@dataclass
class _Tally:
    name: str
    instances: int = 0
    falsified: int = 0
    inconclusive: int = 0
    first_failure: Optional[str] = None

    def fail(self, message: str) -> None:
        self.falsified += 1
        if self.first_failure is None:
            self.first_failure = message

    def result(self) -> SuiteResult:
        return SuiteResult(self.name, self.instances, self.falsified,
                           self.inconclusive, self.first_failure)


# ---------------------------------------------------------------------------
# Reference agreement
# ---------------------------------------------------------------------------


def suite_oracle(rng: random.Random, count: int,
                 cfg: GenConfig) -> SuiteResult:
    """Loop-free programs, all four modes, three quantities each:
    symbolic result equals the reference value on every domain state."""
    tally = _Tally("oracle")
    for i in range(count):
        tally.instances += 1
        variables = gen_vars(rng, cfg)
        dom = domain_for(variables, cfg)
        refdom = dom.widened(ORACLE_PAD)
        c = gen_loop_free(rng, variables, cfg)
        quantities = [gen_quantity(rng, variables) for _ in range(3)]
        for mode in Mode:
            for f in quantities:
                res = transform(mode, c, f, _cfg(dom))
                if not isinstance(res.status, Exact):
                    tally.inconclusive += 1
                    continue
                ref = _REF[mode]
                bad = _mismatch(
                    dom.states(),
                    lambda s: eval_quantity(res.quantity, s, dom),
                    lambda s: ref(c, f, s, refdom, EscapePolicy.DROP))
                if bad is not None:
                    s, va, vb = bad
                    tally.fail(_describe(
                        i, c,
                        f"{mode.name.lower()} of {quantity_to_str(f)} at {s}"
                        f": symbolic {va}, reference {vb}"))
                    break
            else:
                continue
            break
    return tally.result()


def suite_loops(rng: random.Random, count: int, cfg: GenConfig) -> SuiteResult:
    """Bounded loops: every transform that converges agrees with the
    reference pointwise. Truncated transforms count as inconclusive."""
    tally = _Tally("loops")
    for i in range(count):
        tally.instances += 1
        c, variables = gen_bounded_loop(rng, cfg)
        # Loops that converge do so within a few unrollings; a gradual
        # walk through the guard band never closes symbolically, so a
        # short fuel just reaches the truncation verdict sooner.
        dom = domain_for(variables, cfg).with_fuel(12)
        refdom = dom.widened(ORACLE_PAD)
        f = gen_quantity(rng, variables, depth=2)
        for mode in Mode:
            res = transform(mode, c, f, _cfg(dom))
            if not res.trustworthy:
                tally.inconclusive += 1
                continue
            ref = _REF[mode]
            bad = _mismatch(
                dom.states(),
                lambda s: eval_quantity(res.quantity, s, dom),
                lambda s: ref(c, f, s, refdom, EscapePolicy.DROP))
            if bad is not None:
                s, va, vb = bad
                tally.fail(_describe(
                    i, c,
                    f"{mode.name.lower()} of {quantity_to_str(f)} at {s}"
                    f": symbolic {va}, reference {vb}"))
                break
    return tally.result()


# ---------------------------------------------------------------------------
# Theorem suites
# ---------------------------------------------------------------------------


def suite_galois(rng: random.Random, count: int,
                 cfg: GenConfig) -> SuiteResult:
    from .proofs import check_galois

    tally = _Tally("galois")
    for i in range(count):
        tally.instances += 1
        variables = gen_vars(rng, cfg)
        dom = domain_for(variables, cfg)
        c = gen_loop_free(rng, variables, cfg)
        f = gen_quantity(rng, variables)
        g = gen_quantity(rng, variables)
        for which in ("wlp_sp", "wp_slp"):
            verdict = check_galois(which, c, f, g, dom)
            if verdict.is_unknown:
                tally.inconclusive += 1
            elif verdict.is_fails:
                tally.fail(_describe(i, c, f"{which}: {verdict}"))
                break
    return tally.result()


def suite_duality(rng: random.Random, count: int,
                  cfg: GenConfig) -> SuiteResult:
    tally = _Tally("duality")
    for i in range(count):
        tally.instances += 1
        variables = gen_vars(rng, cfg)
        dom = domain_for(variables, cfg)
        c = gen_loop_free(rng, variables, cfg)
        f = gen_quantity(rng, variables)
        for mode, dual in ((Mode.WP, Mode.WLP), (Mode.SP, Mode.SLP)):
            plain = transform(mode, c, f, _cfg(dom))
            negated = transform(dual, c, QNeg(f), _cfg(dom))
            bad = _quantity_mismatch(plain.quantity,
                                     QNeg(negated.quantity), dom)
            if bad is not None:
                s, va, vb = bad
                tally.fail(_describe(
                    i, c,
                    f"{mode.name.lower()} vs negated {dual.name.lower()}"
                    f" at {s}: {va} vs {vb}"))
                break
    return tally.result()


def suite_strictness(rng: random.Random, count: int,
                     cfg: GenConfig) -> SuiteResult:
    """wp and sp of the constant -inf are -inf everywhere; wlp and slp
    of +inf are +inf everywhere."""
    tally = _Tally("strictness")
    for i in range(count):
        tally.instances += 1
        variables = gen_vars(rng, cfg)
        dom = domain_for(variables, cfg)
        c = gen_loop_free(rng, variables, cfg)
        for mode in Mode:
            unit = POS_INF if mode.liberal else NEG_INF
            res = transform(mode, c, Const(unit), _cfg(dom))
            bad = _mismatch(dom.states(),
                            lambda s: eval_quantity(res.quantity, s, dom),
                            lambda s: unit)
            if bad is not None:
                s, va, _ = bad
                tally.fail(_describe(
                    i, c, f"{mode.name.lower()} of {unit} gave {va} at {s}"))
                break
    return tally.result()


def suite_monotonicity(rng: random.Random, count: int,
                       cfg: GenConfig) -> SuiteResult:
    """f below max(f, h) is preserved by every transformer."""
    from .proofs import check_order

    tally = _Tally("monotonicity")
    for i in range(count):
        tally.instances += 1
        variables = gen_vars(rng, cfg)
        dom = domain_for(variables, cfg)
        c = gen_loop_free(rng, variables, cfg)
        f = gen_quantity(rng, variables)
        g = QMax(f, gen_quantity(rng, variables))
        for mode in Mode:
            lo = transform(mode, c, f, _cfg(dom))
            hi = transform(mode, c, g, _cfg(dom))
            verdict = check_order(lo.quantity, hi.quantity, dom)
            if not verdict.is_holds:
                tally.fail(_describe(i, c, f"{mode.name.lower()}: {verdict}"))
                break
    return tally.result()


def _commutes(rng: random.Random, count: int, cfg: GenConfig, name: str,
              modes: tuple[Mode, Mode],
              combine: Callable[[Quantity, Quantity], Quantity]
              ) -> SuiteResult:
    tally = _Tally(name)
    for i in range(count):
        tally.instances += 1
        variables = gen_vars(rng, cfg)
        dom = domain_for(variables, cfg)
        c = gen_loop_free(rng, variables, cfg)
        fs = [gen_quantity(rng, variables, depth=2) for _ in range(3)]
        folded = combine(combine(fs[0], fs[1]), fs[2])
        for mode in modes:
            whole = transform(mode, c, folded, _cfg(dom))
            parts = [transform(mode, c, f, _cfg(dom)).quantity for f in fs]
            split = combine(combine(parts[0], parts[1]), parts[2])
            bad = _quantity_mismatch(whole.quantity, split, dom)
            if bad is not None:
                s, va, vb = bad
                tally.fail(_describe(
                    i, c,
                    f"{mode.name.lower()} at {s}: combined {va},"
                    f" split {vb}"))
                break
    return tally.result()


def suite_conjunctiveness(rng: random.Random, count: int,
                          cfg: GenConfig) -> SuiteResult:
    """wp and sp commute with the max of a three-element set."""
    return _commutes(rng, count, cfg, "conjunctiveness",
                     (Mode.WP, Mode.SP), QMax)


def suite_disjunctiveness(rng: random.Random, count: int,
                          cfg: GenConfig) -> SuiteResult:
    """wlp and slp commute with the min of a three-element set."""
    return _commutes(rng, count, cfg, "disjunctiveness",
                     (Mode.WLP, Mode.SLP), QMin)


def suite_linearity(rng: random.Random, count: int,
                    cfg: GenConfig) -> SuiteResult:
    """t(r*f + g) lies below r*t(f) + t(g) for wp and sp, and above it
    for wlp and slp, on finite-valued quantities."""
    tally = _Tally("linearity")
    for i in range(count):
        tally.instances += 1
        variables = gen_vars(rng, cfg)
        dom = domain_for(variables, cfg)
        c = gen_loop_free(rng, variables, cfg)
        f = gen_finite_quantity(rng, variables)
        g = gen_finite_quantity(rng, variables)
        r = SCALE_FACTORS[i % len(SCALE_FACTORS)]
        scaled = QAdd(QScale(r, f), g)
        for mode in Mode:
            whole = transform(mode, c, scaled, _cfg(dom)).quantity
            split = QAdd(QScale(r, transform(mode, c, f, _cfg(dom)).quantity),
                         transform(mode, c, g, _cfg(dom)).quantity)
            for s in dom.states():
                va = eval_quantity(whole, s, dom)
                vb = eval_quantity(split, s, dom)
                sub = not mode.liberal
                if (sub and not va <= vb) or (not sub and not vb <= va):
                    rel = "above" if sub else "below"
                    tally.fail(_describe(
                        i, c,
                        f"{mode.name.lower()} with r={r} at {s}: combined"
                        f" {va} is {rel} split {vb}"))
                    break
            else:
                continue
            break
    return tally.result()


def suite_embedding(rng: random.Random, count: int,
                    cfg: GenConfig) -> SuiteResult:
    """On Iverson-bracket inputs the transformers compute the classical
    predicate transformers: sp and slp on every program, wp and wlp on
    deterministic programs."""
    det_cfg = replace(cfg, allow_choice=False)
    tally = _Tally("embedding")
    for i in range(count):
        tally.instances += 1
        variables = gen_vars(rng, cfg)
        dom = domain_for(variables, cfg)
        refdom = dom.widened(ORACLE_PAD)
        f = Iverson(gen_predicate(rng, variables))
        plans = [(gen_loop_free(rng, variables, cfg), (Mode.SP, Mode.SLP)),
                 (gen_loop_free(rng, variables, det_cfg),
                  (Mode.WP, Mode.WLP))]
        for c, modes in plans:
            for mode in modes:
                res = transform(mode, c, f, _cfg(dom))
                ref = _REF[mode]
                bad = _mismatch(
                    dom.states(),
                    lambda s: eval_quantity(res.quantity, s, dom),
                    lambda s: ref(c, f, s, refdom, EscapePolicy.DROP))
                if bad is not None:
                    s, va, vb = bad
                    tally.fail(_describe(
                        i, c,
                        f"{mode.name.lower()} of {quantity_to_str(f)} at"
                        f" {s}: symbolic {va}, reference {vb}"))
                    break
            else:
                continue
            break
    return tally.result()


def suite_deterministic(rng: random.Random, count: int,
                        cfg: GenConfig) -> SuiteResult:
    """On deterministic programs, wp and wlp agree on terminating
    states; on diverging states wp is -inf and wlp is +inf."""
    det_cfg = replace(cfg, allow_choice=False)
    tally = _Tally("deterministic")
    for i in range(count):
        tally.instances += 1
        variables = gen_vars(rng, det_cfg)
        dom = domain_for(variables, det_cfg)
        refdom = dom.widened(ORACLE_PAD)
        c = gen_loop_free(rng, variables, det_cfg)
        f = gen_quantity(rng, variables)
        wp = transform(Mode.WP, c, f, _cfg(dom)).quantity
        wlp = transform(Mode.WLP, c, f, _cfg(dom)).quantity
        for s in dom.states():
            va = eval_quantity(wp, s, dom)
            vb = eval_quantity(wlp, s, dom)
            finals = collect(c, frozenset({s}), refdom, EscapePolicy.DROP)
            if finals:
                if va != vb:
                    tally.fail(_describe(
                        i, c, f"terminating {s}: wp {va}, wlp {vb}"))
                    break
            elif va != NEG_INF or vb != POS_INF:
                tally.fail(_describe(
                    i, c, f"diverging {s}: wp {va}, wlp {vb}"))
                break
    return tally.result()


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------


ALL_SUITES: dict[str, Callable[[random.Random, int, GenConfig], SuiteResult]]
ALL_SUITES = {
    "oracle": suite_oracle,
    "loops": suite_loops,
    "galois": suite_galois,
    "duality": suite_duality,
    "strictness": suite_strictness,
    "monotonicity": suite_monotonicity,
    "conjunctiveness": suite_conjunctiveness,
    "disjunctiveness": suite_disjunctiveness,
    "linearity": suite_linearity,
    "embedding": suite_embedding,
    "deterministic": suite_deterministic,
}


def run_suite(name: str, seed: int, count: int,
              cfg: GenConfig | None = None) -> SuiteResult:
    """Run one suite with its own seed stream, derived from the given
    seed and the suite name so suites are independent of each other."""
    if name not in ALL_SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from "
                         + ", ".join(sorted(ALL_SUITES)))
    cfg = cfg or GenConfig()
    rng = random.Random(f"{seed}:{name}")
    return ALL_SUITES[name](rng, count, cfg)


def run_all(seed: int, count: int, cfg: GenConfig | None = None,
            names: Iterable[str] | None = None) -> list[SuiteResult]:
    return [run_suite(name, seed, count, cfg)
            for name in (names or ALL_SUITES)]
