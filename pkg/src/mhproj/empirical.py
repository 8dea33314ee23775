"""Multi-horizon causality maps that are robust across VAR orders."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import InsufficientDataError, InvalidSpecError, MhprojError
from .estimate import two_stage
from .infer import wald_causality
from .simulate import SeriesPanel

LEVELS = (0.90, 0.95, 0.99)


@dataclass(frozen=True)
class CausalityCell:
    cause: str
    effect: str
    h: int
    pvalues: dict  # order -> p-value (None if the fit failed)
    statistics: dict  # order -> Wald statistic
    errors: dict = field(default_factory=dict)  # order -> error category

    @property
    def min_p(self) -> Optional[float]:
        vals = [p for p in self.pvalues.values() if p is not None]
        return min(vals) if vals else None

    def significant(self, level: float) -> bool:
        """Significant for at least one order (min-p rule)."""
        mp = self.min_p
        return mp is not None and mp < 1.0 - level

    def significant_all_orders(self, level: float) -> bool:
        vals = list(self.pvalues.values())
        return bool(vals) and all(p is not None and p < 1.0 - level for p in vals)


@dataclass
class CausalityMap:
    orders: tuple
    horizons: tuple
    names: tuple
    test_lags: tuple
    cells: list

    def get(self, cause: str, effect: str, h: int) -> CausalityCell:
        for c in self.cells:
            if c.cause == cause and c.effect == effect and c.h == h:
                return c
        raise KeyError((cause, effect, h))

    def significant_horizons(self, cause: str, effect: str, level: float = 0.95,
                             all_orders: bool = True) -> list[int]:
        out = []
        for c in self.cells:
            if c.cause == cause and c.effect == effect:
                ok = c.significant_all_orders(level) if all_orders else c.significant(level)
                if ok:
                    out.append(c.h)
        return sorted(out)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cause", "effect", "h"] + [f"p_order_{o}" for o in self.orders] + ["min_p"]
                   + [f"sig_{int(round(l * 100))}" for l in LEVELS]
                   + [f"sig_all_{int(round(l * 100))}" for l in LEVELS])
        for c in self.cells:
            ps = [repr(c.pvalues[o]) if c.pvalues[o] is not None else "" for o in self.orders]
            mp = "" if c.min_p is None else repr(c.min_p)
            w.writerow([c.cause, c.effect, c.h] + ps + [mp]
                       + [int(c.significant(l)) for l in LEVELS]
                       + [int(c.significant_all_orders(l)) for l in LEVELS])
        return buf.getvalue()

    def summary(self, level: float = 0.95) -> str:
        """One line per pair listing horizons significant across all orders."""
        lines = []
        for cause in self.names:
            for effect in self.names:
                if cause == effect:
                    continue
                hs = self.significant_horizons(cause, effect, level)
                lines.append(f"{cause} -> {effect}: {', '.join(map(str, hs)) if hs else '-'}")
        return "\n".join(lines) + "\n"


def empirical_causality(panel: SeriesPanel, orders: Sequence[int] = (12, 15, 18),
                        horizons: Sequence[int] = range(1, 25), delta: int = 0,
                        intercept: bool = True, test_lags="min",
                        pairs: Optional[Sequence[tuple]] = None) -> CausalityMap:
    """Two-stage Wald tests of multi-horizon non-causality for every ordered pair.

    ``test_lags`` selects the restricted lags: ``"min"`` tests lags
    1..min(orders) at every order, ``"order"`` tests 1..p for order p, and a
    sequence fixes the lags explicitly. Failed fits are recorded per cell.
    """
    orders = tuple(sorted(int(o) for o in orders))
    horizons = tuple(int(h) for h in horizons)
    if not orders or not horizons:
        raise InvalidSpecError("need at least one order and one horizon")
    y = panel.data
    T, k = y.shape
    if T - max(horizons) - max(orders) - delta <= (max(orders) + delta) * k + 1:
        raise InsufficientDataError(f"T={T} too small for order {max(orders)} at horizon {max(horizons)}")
    names = tuple(panel.names)
    if pairs is None:
        pairs = [(c, e) for e in range(k) for c in range(k) if c != e]
    if isinstance(test_lags, str):
        if test_lags not in ("min", "order"):
            raise InvalidSpecError("test_lags must be 'min', 'order' or a list of lags")
        lag_rule = test_lags
        lag_record = (1, orders[0]) if test_lags == "min" else ("1..order",)
    else:
        lag_rule = tuple(int(l) for l in test_lags)
        if max(lag_rule) > orders[0] or min(lag_rule) < 1:
            raise InvalidSpecError(f"test lags must lie in 1..{orders[0]}")
        lag_record = lag_rule
    results = {}
    effects = sorted({e for _, e in pairs})
    for e in effects:
        for p in orders:
            lags = (range(1, orders[0] + 1) if lag_rule == "min" else
                    range(1, p + 1) if lag_rule == "order" else lag_rule)
            for h in horizons:
                try:
                    fit = two_stage(y, p, h, delta, e, intercept)
                except MhprojError as exc:
                    for c, ee in pairs:
                        if ee == e:
                            results[(c, e, h, p)] = (None, None, exc.category)
                    continue
                for c, ee in pairs:
                    if ee != e:
                        continue
                    try:
                        wr = wald_causality(fit, c, lags)
                        results[(c, e, h, p)] = (wr.p_value, wr.statistic, None)
                    except MhprojError as exc:
                        results[(c, e, h, p)] = (None, None, exc.category)
    cells = []
    for c, e in pairs:
        for h in horizons:
            pv = {p: results[(c, e, h, p)][0] for p in orders}
            st = {p: results[(c, e, h, p)][1] for p in orders}
            er = {p: results[(c, e, h, p)][2] for p in orders if results[(c, e, h, p)][2]}
            cells.append(CausalityCell(names[c], names[e], h, pv, st, er))
    return CausalityMap(orders, horizons, names, tuple(lag_record), cells)
