"""Numeric evaluation of the packing bounds.

Two k-conventions meet here.  ``main_bound`` and ``bound_report`` take the
clique index of K_k.  The construction packs K_{k'+1}-free graphs with
k' = k - 1 parts per line, so the field size comes from ``choose_q(r, k - 1)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

from . import __version__
from .finite_field import is_prime_power
from .packing import estimate_failure_bound, failure_exponent

C_SMALL = (7 + 6 * math.log(2)) / (3 * math.sqrt(2))


class BoundAssertionError(AssertionError):
    pass


def constant_C() -> int:
    """ceil((2c)^5)."""
    return math.ceil((2 * C_SMALL) ** 5)


def choose_q(r: int, k: int, odd_only: bool = True) -> int:
    """Smallest prime power q >= c k sqrt(r), with the size checks asserted.

    The construction needs odd q, so even prime powers are skipped unless
    ``odd_only`` is False.  Raises BoundAssertionError if any of
    q^2 - 1 >= 2rk ln k, q - 1 >= 2k(1 + ln r), q <= 2ck sqrt(r) fails.
    """
    if r < 2 or k < 2:
        raise ValueError("need r >= 2 and k >= 2")
    target = C_SMALL * k * math.sqrt(r)
    q = math.ceil(target)
    while True:
        pe = is_prime_power(q)
        if pe is not None and (pe[0] != 2 or not odd_only):
            break
        q += 1
    failed = [name for name, ok in _q_conditions(q, r, k).items() if not ok]
    if failed:
        raise BoundAssertionError(f"q={q} for r={r}, k={k} violates {failed}")
    return q


def _q_conditions(q: int, r: int, k: int) -> dict[str, bool]:
    return {
        "s>=2rk*ln(k)": q * q - 1 >= 2 * r * k * math.log(k),
        "t>=2k(1+ln(r))": q - 1 >= 2 * k * (1 + math.log(r)),
        "q<=2ck*sqrt(r)": q <= 2 * C_SMALL * k * math.sqrt(r),
    }


class MainBound(NamedTuple):
    formula: float
    constructive: int
    q: int


def main_bound(r: int, k: int) -> MainBound:
    """C (k-1)^5 r^(5/2) and the constructive q^5 with q = choose_q(r, k-1)."""
    if r < 2 or k < 3:
        raise ValueError("need r >= 2 and k >= 3")
    formula = constant_C() * (k - 1) ** 5 * r ** 2 * math.sqrt(r)
    q = choose_q(r, k - 1)
    return MainBound(formula, q ** 5, q)


def quadratic(q: float, r: int, k: int) -> float:
    return q * q / (r * k) - (1 + math.log(r)) / r * q - math.log(k)


class QuadraticThreshold(NamedTuple):
    root: float
    q0: float
    value_at_q0: float


def quadratic_threshold(r: int, k: int) -> QuadraticThreshold:
    """Positive root of q^2/(rk) - q(1+ln r)/r - ln k and the sufficient
    q0 = k(1 + ln r) + sqrt(rk ln k)."""
    if r < 2 or k < 2:
        raise ValueError("need r >= 2 and k >= 2")
    # times rk: q^2 - k(1+ln r) q - rk ln k = 0
    b = k * (1 + math.log(r))
    c = r * k * math.log(k)
    root = (b + math.sqrt(b * b + 4 * c)) / 2
    q0 = b + math.sqrt(c)
    return QuadraticThreshold(root, q0, quadratic(q0, r, k))


def refined_bound(r: int, k: int) -> float:
    """2^9 [(k-1)^5 ln^5 r + (k-1)^(5/2) r^(5/2) ln^(5/2)(k-1)]."""
    if r < 2 or k < 2:
        raise ValueError("need r >= 2 and k >= 2")
    km = k - 1
    first = km ** 5 * math.log(r) ** 5
    second = km ** 2.5 * r ** 2.5 * math.log(km) ** 2.5
    return 512 * (first + second)


@dataclass
class BoundReport:
    r: int
    k: int
    packing_k: int
    c: float
    C: int
    q_star: int
    num_points: int
    main_bound: float
    refined_bound: float
    failure_bound: float
    log_failure_bound: float
    conditions: dict[str, bool]
    version: str = __version__

    def to_json(self) -> str:
        data = asdict(self)
        data["c"] = float(f"{self.c:.15g}")
        return json.dumps(data, indent=2, sort_keys=True) + "\n"


def bound_report(r: int, k: int) -> BoundReport:
    """Every bound for s_r(K_k), plus the lemma hypotheses at the chosen q."""
    mb = main_bound(r, k)
    q, kp = mb.q, k - 1
    fb = estimate_failure_bound(q * q - 1, q - 1, r, kp, q ** 5)
    conditions = _q_conditions(q, r, kp)
    conditions["failure_bound<1"] = fb < 1
    conditions["constructive<=main"] = mb.constructive <= mb.formula
    return BoundReport(
        r=r, k=k, packing_k=kp, c=C_SMALL, C=constant_C(), q_star=q, num_points=mb.constructive,
        main_bound=mb.formula, refined_bound=refined_bound(r, k), failure_bound=fb,
        log_failure_bound=failure_exponent(q * q - 1, q - 1, r, kp, q ** 5),
        conditions=conditions,
    )


__all__ = [
    "C_SMALL", "BoundAssertionError", "BoundReport", "MainBound", "QuadraticThreshold",
    "bound_report", "choose_q", "constant_C", "estimate_failure_bound", "is_prime_power",
    "main_bound", "quadratic", "quadratic_threshold", "refined_bound",
]
