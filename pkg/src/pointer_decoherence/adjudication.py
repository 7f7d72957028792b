"""Decide between the two printed closed forms of the decoherence factor
using the grid oracle as ground truth."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .grid import GridSpec, auto_grid, convergence_study
from .pointer import MeasurementConfig, log_decoherence_factor, printed_log_factor

CANONICAL = MeasurementConfig(g=1.0, t=1.0, m=1.0, sigma=1.0)
CANONICAL_EIGENVALUES = (1.0, -1.0)
MARGIN_FACTOR = 10.0


@dataclass
class Verdict:
    log_f_grid: float
    log_f_exact: float
    log_f_five_eighths: float
    log_f_one_eighth: float
    grid_error_bar: float
    margin: float
    verdict: str
    time_orders: list
    space_differences: list

    @property
    def decisive(self) -> bool:
        return self.margin >= MARGIN_FACTOR * self.grid_error_bar

    def as_dict(self) -> dict:
        d = asdict(self)
        d["decisive"] = self.decisive
        return d

    def lines(self) -> list[str]:
        return [
            f"ln F (grid, extrapolated)  = {self.log_f_grid:.17g}",
            f"ln F (exact overlap)       = {self.log_f_exact:.17g}",
            f"ln F (5/8 printed form)    = {self.log_f_five_eighths:.17g}",
            f"ln F (1/8 printed form)    = {self.log_f_one_eighth:.17g}",
            f"grid error bar (log)       = {self.grid_error_bar:.3g}",
            f"discrimination margin      = {self.margin:.3g} (needs >= {MARGIN_FACTOR:g} x error bar)",
            f"verdict: {self.verdict}",
        ]


def adjudicate_coefficient(
    cfg: MeasurementConfig = CANONICAL, eigenvalues=CANONICAL_EIGENVALUES
) -> Verdict:
    """Run time- and space-refinement ladders and compare both printed forms
    against the extrapolated grid overlap in the log domain."""
    ai, aj = eigenvalues
    base = auto_grid(cfg, eigenvalues)
    time_ladder = [base.with_steps(n) for n in (16, 32, 64, 128)]
    space_ladder = [GridSpec(base.x_min, base.x_max, n, 64) for n in (512, 1024, 2048, 4096)]
    tr = convergence_study(time_ladder, cfg, eigenvalues)
    sr = convergence_study(space_ladder, cfg, eigenvalues)
    label = f"overlap[{ai:g},{aj:g}]"
    f_time = abs(tr.value(label))
    f_space = abs(sr.value(label))
    log_grid = math.log(f_time)
    it, isp = tr.labels.index(label), sr.labels.index(label)
    err = max(
        abs(tr.values[-1][it] - tr.values[-2][it]),
        abs(sr.values[-1][isp] - sr.values[-2][isp]),
        abs(f_time - f_space),
    ) / f_time
    # Never claim a bar below double-precision resolution of ln F.
    err = max(err, 4 * math.ulp(abs(log_grid)))
    l58 = printed_log_factor(cfg, ai, aj, "five_eighths")
    l18 = printed_log_factor(cfg, ai, aj, "one_eighth")
    margin = abs(l58 - l18)
    if margin >= MARGIN_FACTOR * err:
        winner = "5/8" if abs(l58 - log_grid) < abs(l18 - log_grid) else "1/8"
        verdict = f"{winner} form supported by the grid oracle"
    else:
        agree = max(abs(l58 - log_grid), abs(l18 - log_grid)) <= MARGIN_FACTOR * err
        verdict = (
            "indistinguishable: the two printed forms coincide"
            + (" and both match the grid oracle" if agree else "; neither matches the grid oracle")
        )
    return Verdict(
        log_f_grid=log_grid,
        log_f_exact=log_decoherence_factor(cfg, ai, aj),
        log_f_five_eighths=l58,
        log_f_one_eighth=l18,
        grid_error_bar=err,
        margin=margin,
        verdict=verdict,
        time_orders=tr.orders,
        space_differences=sr.differences,
    )
