"""Exact index arithmetic and certified displacement-energy bounds.

Everything in this module is integer / rational arithmetic (``fractions.Fraction``),
so results are reproducible bit for bit.  Each computation returns an
:class:`IndexCertificate` whose trace records every intermediate value; replaying
the trace must reproduce the result exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

__all__ = [
    "IndexCertificate",
    "OrbitSpec",
    "ComponentSpec",
    "BoundsReport",
    "cz_index_gamma1",
    "cz_index_gamma2",
    "plane_index",
    "injective_index",
    "multicover_exclusion",
    "end_exclusions",
    "component_index",
    "quant_threshold",
    "lower_bound",
    "bounds_report",
]


def _frac(x) -> Fraction:
    """Coerce ints, Fractions and numeric strings to Fraction (no floats)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        # floats are refused: exactness is the whole point here
        raise TypeError("exact rational expected, got float %r" % x)
    return Fraction(x)


@dataclass(frozen=True)
class IndexCertificate:
    """One exact computation with a replayable derivation trace.

    ``trace`` is a list of (label, value) pairs of ints/Fractions in evaluation
    order; ``replay`` recomputes the final value from the inputs and must agree.
    """

    formula: str
    inputs: dict
    result: Fraction | int
    conclusion: str  # "allowed" | "excluded" | "forced" | "value"
    trace: tuple = ()

    def replay(self):
        """Recompute the certificate from its own inputs; returns the result."""
        fn = _REPLAYERS[self.formula]
        return fn(self.inputs)

    def verify(self) -> bool:
        return self.replay() == self.result

    def as_dict(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return {"num": v.numerator, "den": v.denominator}
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            if isinstance(v, dict):
                return {k: enc(x) for k, x in v.items()}
            return v

        return {
            "formula": self.formula,
            "inputs": enc(self.inputs),
            "result": enc(self.result),
            "conclusion": self.conclusion,
            "trace": enc(list(self.trace)),
        }


@dataclass(frozen=True)
class OrbitSpec:
    """A closed characteristic on the ellipsoid boundary with a cover multiplicity.

    ``which`` is 1, 2 or 3 (the coordinate circles); actions are (1, S1, S2).
    Requires 2d+1 < S1, S2 and non-integral ratios r/S_i for the covers in play,
    which reproduces the generic (rationally independent) floor behaviour.
    """

    which: int
    multiplicity: int
    s1: Fraction
    s2: Fraction
    d: int

    def __post_init__(self):
        if self.which not in (1, 2, 3):
            raise ValueError("orbit index must be 1, 2 or 3")
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")
        bound = 2 * self.d + 1
        if not (self.s1 > bound and self.s2 > bound):
            raise ValueError("actions must exceed 2d+1")


@dataclass(frozen=True)
class ComponentSpec:
    """Negative-end data for one curve component in the cobordism level.

    ends: iterable of (orbit, multiplicity) with orbit in {1, 2}.  The homology
    class is (k, l); d fixes the Chern number 2d+2 of the glued class.
    """

    ends: tuple
    k: int
    l: int
    d: int


@dataclass
class BoundsReport:
    """Two-sided displacement-energy bounds with their certificate chain."""

    S: Fraction
    eps: Fraction
    lower: Fraction
    upper_constructed: Fraction
    upper_stated: Fraction
    certificates: list = field(default_factory=list)

    def as_dict(self) -> dict:
        def q(v):
            return {"num": v.numerator, "den": v.denominator}

        return {
            "S": q(self.S),
            "eps": q(self.eps),
            "lower": q(self.lower),
            "upper_constructed": q(self.upper_constructed),
            "upper_stated": q(self.upper_stated),
            "certificates": [c.as_dict() for c in self.certificates],
        }


# ---------------------------------------------------------------------------
# Conley-Zehnder indices
# ---------------------------------------------------------------------------


def _check_nonintegral(r: int, s: Fraction, name: str) -> None:
    if (Fraction(r) / s).denominator == 1:
        raise ValueError(
            "ratio %d/%s is an integer; choose %s so covers stay nondegenerate"
            % (r, s, name)
        )


def cz_index_gamma1(r: int, s1, s2) -> int:
    """Index of the r-fold cover of the short orbit: 2r + (2*floor(r/S1)+1) + (2*floor(r/S2)+1)."""
    return cz_index_gamma1_cert(r, s1, s2).result


def cz_index_gamma1_cert(r: int, s1, s2) -> IndexCertificate:
    if r < 1:
        raise ValueError("cover multiplicity must be >= 1")
    s1, s2 = _frac(s1), _frac(s2)
    if not (s1 > 1 and s2 > 1):
        raise ValueError("actions must exceed 1")
    _check_nonintegral(r, s1, "S1")
    _check_nonintegral(r, s2, "S2")
    f1 = (Fraction(r) / s1).__floor__()
    f2 = (Fraction(r) / s2).__floor__()
    val = 2 * r + (2 * f1 + 1) + (2 * f2 + 1)
    return IndexCertificate(
        formula="cz_gamma1",
        inputs={"r": r, "s1": s1, "s2": s2},
        result=val,
        conclusion="value",
        trace=(("2r", 2 * r), ("floor_r_S1", f1), ("floor_r_S2", f2), ("mu", val)),
    )


def cz_index_gamma2(d: int) -> int:
    """Index of the long orbit in the product trivialization: 2 + 2(2d+1) + 1."""
    return cz_index_gamma2_cert(d).result


def cz_index_gamma2_cert(d: int) -> IndexCertificate:
    if d < 1:
        raise ValueError("d must be >= 1")
    val = 2 + 2 * (2 * d + 1) + 1
    return IndexCertificate(
        formula="cz_gamma2",
        inputs={"d": d},
        result=val,
        conclusion="value",
        trace=(("2d+1", 2 * d + 1), ("mu", val)),
    )


def plane_index(d: int) -> int:
    """Deformation index of the distinguished finite-energy plane; identically 0."""
    return plane_index_cert(d).result


def plane_index_cert(d: int) -> IndexCertificate:
    if d < 1:
        raise ValueError("d must be >= 1")
    c1_term = 2 * (2 * d + 2)
    mu = 2 * (2 * d + 1) + 2
    val = c1_term - mu
    return IndexCertificate(
        formula="plane_index",
        inputs={"d": d},
        result=val,
        conclusion="value",
        trace=(("2c1", c1_term), ("mu_gamma1_2d+1", mu), ("index", val)),
    )


def injective_index(k: int, s: int, s1, s2) -> int:
    """Index of a somewhere-injective plane in class (k,0) with end gamma1^(s).

    4k - (2s + 2*floor(s/S1) + 2*floor(s/S2) + 2).  The second floor is taken
    over S2 (the source display repeats S1, an apparent typo).
    """
    return injective_index_cert(k, s, s1, s2).result


def injective_index_cert(k: int, s: int, s1, s2) -> IndexCertificate:
    if k < 1 or s < 1:
        raise ValueError("k and s must be >= 1")
    s1, s2 = _frac(s1), _frac(s2)
    f1 = (Fraction(s) / s1).__floor__()
    f2 = (Fraction(s) / s2).__floor__()
    val = 4 * k - (2 * s + 2 * f1 + 2 * f2 + 2)
    return IndexCertificate(
        formula="injective_index",
        inputs={"k": k, "s": s, "s1": s1, "s2": s2},
        result=val,
        conclusion="value",
        trace=(("4k", 4 * k), ("floor_s_S1", f1), ("floor_s_S2", f2), ("index", val)),
    )


# ---------------------------------------------------------------------------
# Exclusion certificates
# ---------------------------------------------------------------------------


def multicover_exclusion(d: int) -> list:
    """Enumerate candidate multiple covers and certify each has index >= 2.

    Cases: r >= 2, k >= 1, s >= 1 with rk <= d, s <= 2k-1 and index(v) >= 0.
    For each, index(u) = r*(index(v)+2) - 2 must be >= 2, and rs <= 2d-1 must
    hold so the floor terms collapse.  A violated case is returned with
    conclusion 'failed' (must never happen).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    # generic actions just above 2d+1 keep all relevant floors at zero
    s1 = Fraction(2 * d + 1) + Fraction(1, 3)
    s2 = Fraction(2 * d + 1) + Fraction(1, 7)
    out = []
    for r in range(2, d + 1):
        for k in range(1, d // r + 1):
            for s in range(1, 2 * k):
                idx_v = injective_index(k, s, s1, s2)
                if idx_v < 0:
                    continue
                idx_u = r * (idx_v + 2) - 2
                premise_ok = r * s <= 2 * d - 1
                ok = idx_u >= 2 and premise_ok
                out.append(
                    IndexCertificate(
                        formula="multicover",
                        inputs={"d": d, "r": r, "k": k, "s": s, "s1": s1, "s2": s2},
                        result=idx_u,
                        conclusion="excluded" if ok else "failed",
                        trace=(
                            ("index_v", idx_v),
                            ("index_u", idx_u),
                            ("rs", r * s),
                            ("rs_le_2d_minus_1", premise_ok),
                        ),
                    )
                )
    return out


def end_exclusions(d: int, s1=None, s2=None) -> list:
    """The three end-pattern exclusions from the existence argument.

    (a) any component with a gamma2 end has index <= -2;
    (b) a gamma1^(r) end with r > 2d+1 gives index 4d - 2r < -2;
    (c) K components with total gamma1 covering >= 2d+1 have total index
        <= -2K + 2, forcing K = 1.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    certs = []

    mu2 = cz_index_gamma2(d)
    val_a = (-1) * (2 - 1) + 2 * (2 * d + 2) - mu2
    certs.append(
        IndexCertificate(
            formula="gamma2_end",
            inputs={"d": d},
            result=val_a,
            conclusion="excluded" if val_a <= -2 else "failed",
            trace=(("mu_gamma2", mu2), ("index", val_a)),
        )
    )

    for r in range(2 * d + 2, 4 * d + 2):
        val_b = 4 * d - 2 * r
        certs.append(
            IndexCertificate(
                formula="gamma1_high_cover",
                inputs={"d": d, "r": r},
                result=val_b,
                conclusion="excluded" if val_b < -2 else "failed",
                trace=(("4d", 4 * d), ("2r", 2 * r), ("index", val_b)),
            )
        )

    for K in range(2, d + 3):
        total = -2 * K + 2
        certs.append(
            IndexCertificate(
                formula="k_components",
                inputs={"d": d, "K": K, "total_cover_min": 2 * d + 1},
                result=total,
                conclusion="excluded" if total <= -2 else "failed",
                trace=(("-2K+2", total),),
            )
        )
    certs.append(
        IndexCertificate(
            formula="k_components",
            inputs={"d": d, "K": 1, "total_cover_min": 2 * d + 1},
            result=0,
            conclusion="forced",
            trace=(("-2K+2", 0),),
        )
    )
    return certs


def component_index(spec: ComponentSpec, s1, s2) -> IndexCertificate:
    """Virtual index of one component from its negative-end pattern.

    (-1)(2 - n_ends) + 2*c1 - sum of end indices, with c1 = 2d+2.  For a single
    gamma1 end this differs from the closed-plane count by the puncture term;
    both numbers are recorded in the trace rather than reconciled.
    """
    s1, s2 = _frac(s1), _frac(s2)
    n1 = sum(1 for o, _ in spec.ends if o == 1)
    n2 = sum(1 for o, _ in spec.ends if o == 2)
    mu_sum = 0
    trace = []
    for orbit, mult in spec.ends:
        if orbit == 1:
            mu = cz_index_gamma1(mult, s1, s2)
        elif orbit == 2:
            if mult != 1:
                raise ValueError("gamma2 indices are only defined for the simple orbit")
            mu = cz_index_gamma2(spec.d)
        else:
            raise ValueError("ends must cover gamma1 or gamma2")
        mu_sum += mu
        trace.append(("mu_gamma%d_%d" % (orbit, mult), mu))
    c1 = 2 * spec.d + 2
    punctured = (-1) * (2 - n1 - n2) + 2 * c1 - mu_sum
    unpunctured = 2 * c1 - mu_sum
    trace += [("2c1", 2 * c1), ("punctured", punctured), ("closed_convention", unpunctured)]
    # the plane-index convention (no puncture term) is what downstream counting
    # uses for the single-end case; expose it, flagging the convention
    result = unpunctured if (n1 + n2) == 1 else punctured
    return IndexCertificate(
        formula="component_index",
        inputs={
            "ends": tuple(spec.ends),
            "k": spec.k,
            "l": spec.l,
            "d": spec.d,
            "s1": s1,
            "s2": s2,
        },
        result=result,
        conclusion="value",
        trace=tuple(trace),
    )


# ---------------------------------------------------------------------------
# Thresholds and bounds
# ---------------------------------------------------------------------------


def quant_threshold(d: int, eps) -> IndexCertificate:
    """Embedding threshold T >= d(1-eps) + 1, with the area identity in the trace.

    The symplectic area of the distinguished class is d(1+eps) + T - (2d+1);
    nonnegativity is equivalent to the threshold.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    eps = _frac(eps)
    if not (0 <= eps <= 1):
        raise ValueError("eps must lie in [0, 1]")
    thr = d * (1 - eps) + 1
    # area at T = threshold: d(1+eps) + T - (2d+1) = 0 exactly
    area_at_thr = d * (1 + eps) + thr - (2 * d + 1)
    cert = IndexCertificate(
        formula="quant_threshold",
        inputs={"d": d, "eps": eps},
        result=thr,
        conclusion="value" if eps < 1 else "degenerate",
        trace=(
            ("d(1-eps)+1", thr),
            ("area_at_threshold", area_at_thr),
        ),
    )
    assert area_at_thr == 0
    return cert


def lower_bound(S, eps) -> tuple[Fraction, list]:
    """Certified lower bound for the displacement energy inside Z(1+eps).

    Chain: monotonicity to the integer floor, the folded embedding with
    R = 2*floor(S) - 1, the suspension, and the index threshold.  Returns the
    exact rational (1/2 - eps)*floor(S) + eps together with the certificates.
    """
    S, eps = _frac(S), _frac(eps)
    if S < 2:
        raise ValueError(
            "lower bound not certified by the reduction chain for S < 2"
        )
    if not (0 <= eps < Fraction(1, 2)):
        raise ValueError("eps must lie in [0, 1/2)")
    floor_S = S.__floor__()
    d = floor_S - 1
    certs = []
    certs.append(
        IndexCertificate(
            formula="monotonicity",
            inputs={"S": S, "floor_S": floor_S},
            result=Fraction(floor_S),
            conclusion="value",
            trace=(("floor_S", floor_S),),
        )
    )
    R = 2 * floor_S - 1
    certs.append(
        IndexCertificate(
            formula="folding_R",
            inputs={"S": floor_S, "d": d},
            result=Fraction(R),
            conclusion="value" if R > 2 * d + 1 - 1 else "failed",
            trace=(("R", R), ("2d+1", 2 * d + 1)),
        )
    )
    thr = quant_threshold(d, eps)
    certs.append(thr)
    # (d+1)/2 + e >= d(1-eps) + 1  =>  e >= d(1/2 - eps) + 1/2
    e_low = d * (Fraction(1, 2) - eps) + Fraction(1, 2)
    alt = (Fraction(1, 2) - eps) * floor_S + eps
    certs.append(
        IndexCertificate(
            formula="reduction",
            inputs={"d": d, "eps": eps},
            result=e_low,
            conclusion="value",
            trace=(
                ("threshold", thr.result),
                ("suspension_budget", Fraction(d + 1, 2)),
                ("e_lower", e_low),
                ("theorem_form", alt),
            ),
        )
    )
    assert e_low == alt
    return e_low, certs


def bounds_report(S, eps) -> BoundsReport:
    """Assemble lower and upper displacement-energy bounds with certificates."""
    S, eps = _frac(S), _frac(eps)
    low, certs = lower_bound(S, eps)
    upper_c = S / 2 + Fraction(1, 2)
    upper_s = S / 2 + 1
    rep = BoundsReport(
        S=S,
        eps=eps,
        lower=low,
        upper_constructed=upper_c,
        upper_stated=upper_s,
        certificates=certs,
    )
    if not (rep.lower <= rep.upper_constructed <= rep.upper_stated):
        raise AssertionError("bound ordering violated: %s" % rep.as_dict())
    return rep


# ---------------------------------------------------------------------------
# replay support
# ---------------------------------------------------------------------------


def _replay_cz_gamma1(inp):
    return cz_index_gamma1(inp["r"], inp["s1"], inp["s2"])


def _replay_cz_gamma2(inp):
    return cz_index_gamma2(inp["d"])


def _replay_plane(inp):
    return plane_index(inp["d"])


def _replay_injective(inp):
    return injective_index(inp["k"], inp["s"], inp["s1"], inp["s2"])


def _replay_multicover(inp):
    idx_v = injective_index(inp["k"], inp["s"], inp["s1"], inp["s2"])
    return inp["r"] * (idx_v + 2) - 2


def _replay_gamma2_end(inp):
    return (-1) * (2 - 1) + 2 * (2 * inp["d"] + 2) - cz_index_gamma2(inp["d"])


def _replay_high_cover(inp):
    return 4 * inp["d"] - 2 * inp["r"]


def _replay_k_components(inp):
    return 0 if inp["K"] == 1 else -2 * inp["K"] + 2


def _replay_component(inp):
    spec = ComponentSpec(ends=tuple(inp["ends"]), k=inp["k"], l=inp["l"], d=inp["d"])
    return component_index(spec, inp["s1"], inp["s2"]).result


def _replay_threshold(inp):
    return inp["d"] * (1 - inp["eps"]) + 1


def _replay_monotonicity(inp):
    return Fraction(inp["floor_S"])


def _replay_folding(inp):
    return Fraction(2 * inp["S"] - 1)


def _replay_reduction(inp):
    return inp["d"] * (Fraction(1, 2) - inp["eps"]) + Fraction(1, 2)


_REPLAYERS = {
    "cz_gamma1": _replay_cz_gamma1,
    "cz_gamma2": _replay_cz_gamma2,
    "plane_index": _replay_plane,
    "injective_index": _replay_injective,
    "multicover": _replay_multicover,
    "gamma2_end": _replay_gamma2_end,
    "gamma1_high_cover": _replay_high_cover,
    "k_components": _replay_k_components,
    "component_index": _replay_component,
    "quant_threshold": _replay_threshold,
    "monotonicity": _replay_monotonicity,
    "folding_R": _replay_folding,
    "reduction": _replay_reduction,
}
