"""End-to-end synthesis: projectors -> split -> Riccati -> feedback gains."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .control import feedback_gain
from .descriptor import (
    DescriptorSystem,
    SpectralProjectors,
    compute_projectors,
    semi_explicit_projectors,
)
from .grid import TimeGrid
from .riccati import (
    RiccatiSolution,
    lift_projection_free,
    solve_algebraic_pi0,
    solve_projected_dre,
)
from .signals import GainSchedule
from .weierstrass import (
    QuadraticWeights,
    SplitWeights,
    WeierstrassForm,
    check_weight_compatibility,
    decompose,
    split_weights,
)

__all__ = ["Synthesis", "synthesize"]


@dataclass(frozen=True)
class Synthesis:
    """All intermediate products of one feedback synthesis."""

    sys: DescriptorSystem
    proj: SpectralProjectors
    wf: WeierstrassForm
    weights: QuadraticWeights
    sw: SplitWeights
    rs: RiccatiSolution
    gains: GainSchedule


def synthesize(
    sys: DescriptorSystem,
    weights: QuadraticWeights,
    grid: TimeGrid,
    semi_explicit: bool = False,
    tol_proj: float | None = None,
    tol_weights: float | None = None,
    tol_dre: float | None = None,
    dre_rtol: float | None = None,
    dre_atol: float | None = None,
) -> Synthesis:
    """Run the full synthesis chain and return every intermediate product.

    semi_explicit=True takes the closed-form projector fast path for
    E = blockdiag(E11, 0) structure instead of the ordered QZ route.
    """
    proj_kwargs = {} if tol_proj is None else {"tol_proj": tol_proj}
    if semi_explicit:
        proj = semi_explicit_projectors(sys, **proj_kwargs)
    else:
        proj = compute_projectors(sys, **proj_kwargs)
    wf = decompose(sys, proj, **proj_kwargs)
    wc_kwargs = {} if tol_weights is None else {"tol_weights": tol_weights}
    report = check_weight_compatibility(weights, proj, **wc_kwargs)
    sw = split_weights(weights, wf, report)
    Pi0, Pit0 = solve_algebraic_pi0(sys, wf, sw)
    dre_kwargs = {}
    if tol_dre is not None:
        dre_kwargs["tol_dre"] = tol_dre
    if dre_rtol is not None:
        dre_kwargs["rtol"] = dre_rtol
    if dre_atol is not None:
        dre_kwargs["atol"] = dre_atol
    rs = solve_projected_dre(wf, sw, grid, **dre_kwargs)
    rs = replace(rs, Pi0=Pi0, Pit0=Pit0)
    rs = lift_projection_free(rs, wf, proj)
    gains = feedback_gain(rs, sys, weights)
    return Synthesis(sys=sys, proj=proj, wf=wf, weights=weights, sw=sw, rs=rs, gains=gains)
