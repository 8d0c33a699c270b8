"""Decision procedures for the Besse and Zoll properties.

besse_by_invariants scans a spectral-invariant list for an equality
c_i = c_{i+n-1}; each hit certifies a Besse flow with common period c_i and
Conley-Zehnder index mu = 2i + n, and a hit at i = 0 certifies Zoll.
zoll_by_pinching decides the Zoll property of a delta-pinched body from its
action spectrum on the window (sys, delta^2 sys).  besse_sufficient_eh runs
the same equality scan on exact capacity values under a discreteness
attestation and labels its verdict as a sufficient condition only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .bodies import ConvexBody

TOL_EQ = 1e-9  # relative, float invariant lists


@dataclass(frozen=True)
class BesseHit:
    i: int
    tau: object
    mu: int


def _values_equal(x, y, exact: bool) -> bool:
    if exact:
        return x == y
    scale = max(abs(float(x)), abs(float(y)), 1.0)
    return abs(float(x) - float(y)) <= TOL_EQ * scale


def besse_by_invariants(c: list, n: int, exact: bool | None = None) -> list[BesseHit]:
    """All i with c_i = c_{i+n-1}; hits carry tau = c_i and mu = 2i + n.

    Exact (Fraction) lists are compared exactly; float lists at 1e-9
    relative.  The input must be non-decreasing and of length >= n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(c) < n:
        raise ValueError(f"need at least n = {n} invariants, got {len(c)}")
    if exact is None:
        exact = all(isinstance(x, (Fraction, int)) for x in c)
    for a, b in zip(c, c[1:]):
        if float(b) < float(a) - (0.0 if exact else TOL_EQ * max(abs(float(a)), 1.0)):
            raise ValueError("invariant list must be non-decreasing")
    hits = []
    for i in range(len(c) - n + 1):
        if _values_equal(c[i], c[i + n - 1], exact):
            hits.append(BesseHit(i=i, tau=c[i], mu=2 * i + n))
    return hits


@dataclass(frozen=True)
class PinchingResult:
    status: str  # "certified-zoll" | "refusal" | "not-applicable"
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"status": self.status, **{k: _plain(v) for k, v in self.detail.items()}}


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def zoll_by_pinching(
    body: ConvexBody,
    partial_spectrum: list,
    delta: float | None = None,
    delta_sq=None,
    coverage_attested: bool = False,
    invariants_c: list | None = None,
) -> PinchingResult:
    """Zoll certificate for a delta-pinched body from its action spectrum.

    Requires R/r < delta <= sqrt(2) (else "not-applicable") and a caller
    attestation that partial_spectrum covers (0, delta^2 sys].  The
    certificate holds iff no spectrum value lies in the OPEN interval
    (sys, delta^2 sys); boundary values do not block.  When an invariant
    list is supplied, the internal bound chain c_{n-1} <= pi R^2 <
    delta^2 pi r^2 <= delta^2 sys is checked and reported.
    """
    if not coverage_attested:
        raise ValueError(
            "zoll_by_pinching needs an explicit attestation that the supplied "
            "spectrum covers (0, delta^2 * sys]; coverage is never inferred"
        )
    if not partial_spectrum:
        raise ValueError("empty spectrum")
    if delta_sq is None:
        if delta is None:
            raise ValueError("supply delta or delta_sq")
        delta_sq = float(delta) ** 2
    dsq = delta_sq  # Fraction stays exact, float stays float
    if float(dsq) <= 1.0 or float(dsq) > 2.0 + 1e-15:
        return PinchingResult(
            status="not-applicable",
            detail={"reason": f"delta^2 = {float(dsq):.6g} outside (1, 2]"},
        )

    r, R = body.pinching_radii()
    if body.kind == "quadric":
        # exact chain values for ellipsoids: pi r^2 = a_1, pi R^2 = a_n
        pi_r2 = body.a[0]
        pi_R2 = body.a[-1]
    else:
        import math

        pi_r2 = math.pi * r * r
        pi_R2 = math.pi * R * R
    pinch_ok = pi_R2 < float(dsq) * pi_r2 if not isinstance(dsq, Fraction) else Fraction(
        pi_R2
    ).limit_denominator(10**12) < dsq * Fraction(pi_r2).limit_denominator(10**12)
    if not pinch_ok:
        return PinchingResult(
            status="not-applicable",
            detail={
                "reason": "pinching hypothesis fails: R^2/r^2 >= delta^2",
                "R_over_r_sq": float(pi_R2) / float(pi_r2),
                "delta_sq": float(dsq),
            },
        )

    spectrum = sorted(partial_spectrum)
    sys_val = spectrum[0]
    upper = dsq * sys_val
    blockers = [v for v in spectrum if sys_val < v < upper]

    detail = {
        "sys": sys_val,
        "delta_sq": dsq,
        "interval": (sys_val, upper),
        "inradius": r,
        "circumradius": R,
    }
    if invariants_c is not None:
        n = body.n
        if len(invariants_c) < n:
            raise ValueError("invariant list shorter than n")
        c_nm1 = invariants_c[n - 1]
        chain = (
            float(c_nm1) <= float(pi_R2) + 1e-12
            and float(pi_R2) < float(dsq) * float(pi_r2)
            and float(dsq) * float(pi_r2) <= float(dsq) * float(sys_val) + 1e-12
        )
        detail["bound_chain"] = {
            "c_{n-1}": c_nm1,
            "pi_R^2": pi_R2,
            "delta^2 pi_r^2": dsq * pi_r2 if isinstance(dsq, Fraction) else float(dsq) * float(pi_r2),
            "delta^2 sys": dsq * sys_val if isinstance(dsq, Fraction) else float(dsq) * float(sys_val),
            "holds": bool(chain),
        }
    if blockers:
        detail["blocking_values"] = blockers[:8]
        return PinchingResult(status="refusal", detail=detail)
    detail["criterion"] = "pinched-zoll-spectral-gap"
    return PinchingResult(status="certified-zoll", detail=detail)


@dataclass(frozen=True)
class EhVerdict:
    hits: list
    label: str
    degenerate: bool = False


def besse_sufficient_eh(c: list, n: int, spectrum_discrete_attested: bool = False) -> EhVerdict:
    """Equality scan labeled as the capacity-based sufficient condition.

    The converse is an open question, so hits are never reported as a
    characterization.  n = 1 makes every index a trivial hit; the verdict
    is flagged degenerate in that case.
    """
    if not spectrum_discrete_attested:
        raise ValueError(
            "refusing the capacity-based verdict without the attestation "
            "that the action spectrum is discrete"
        )
    hits = besse_by_invariants(c, n)
    return EhVerdict(
        hits=hits,
        label="sufficient condition via capacities (no converse claimed)",
        degenerate=(n == 1),
    )
