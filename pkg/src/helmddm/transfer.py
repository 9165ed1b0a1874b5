"""Source transfer between neighbouring subdomains.

A field ``v`` computed in one subdomain is handed to a neighbour as the
source ``-L_target(beta v) chi``: the target operator's residual of the
blended field, kept only on the half (or quarter) plane the transfer points
into.  The residual is evaluated only where it can be nonzero, namely on the
strip in which the blend weight fades out.
"""
from __future__ import annotations

from dataclasses import dataclass

from .discretize import DiscreteOperator, apply_region
from .errors import ContractError
from .grid import FieldGrid, Window
from .partition import GATHER_ORDER, BlendWeights, Direction, SubdomainWindow, direction_mask


@dataclass
class TransferSource:
    target: tuple[int, int]
    direction: Direction
    contribution: FieldGrid


def transfer_region(source: SubdomainWindow, direction: Direction, target_window: Window) -> Window | None:
    """Nodes where a transfer from ``source`` in ``direction`` can be nonzero.

    Along each axis the direction moves on, this is the closed mask half-line
    cut down to the fade-out strip of the blend weight.
    """
    n = source.spec.n_overlap
    lo_p, hi_p = target_window.p0, target_window.p1
    lo_q, hi_q = target_window.q0, target_window.q1
    cp, cq = source.send_cuts(direction)
    if direction.dx > 0:
        lo_p, hi_p = max(lo_p, cp), min(hi_p, cp + n)
    elif direction.dx < 0:
        lo_p, hi_p = max(lo_p, cp - n), min(hi_p, cp)
    if direction.dy > 0:
        lo_q, hi_q = max(lo_q, cq), min(hi_q, cq + n)
    elif direction.dy < 0:
        lo_q, hi_q = max(lo_q, cq - n), min(hi_q, cq)
    # the target's Dirichlet ring never receives a source
    lo_p, hi_p = max(lo_p, target_window.p0 + 1), min(hi_p, target_window.p1 - 1)
    lo_q, hi_q = max(lo_q, target_window.q0 + 1), min(hi_q, target_window.q1 - 1)
    if lo_p > hi_p or lo_q > hi_q:
        return None
    return Window.from_bounds(lo_p, hi_p, lo_q, hi_q)


def transfer(direction: Direction, v: FieldGrid, source: SubdomainWindow, weights: BlendWeights,
             target_op: DiscreteOperator, target: SubdomainWindow | None = None,
             full: bool = False) -> TransferSource:
    """Transfer ``v`` (a step solution of ``source``) to the neighbour in ``direction``.

    ``weights`` are the source's blend weights on its own window.  With
    ``full=True`` the residual is evaluated on the whole target window and
    then masked, which is slower but makes no use of the support bound.
    """
    tgt = source.neighbor(direction)
    if tgt is None:
        raise ContractError(f"subdomain {source.index} has no neighbour towards {direction.name}")
    if target is not None and target.index != tgt:
        raise ContractError(f"target {target.index} is not the {direction.name} neighbour of {source.index}")
    if v.window != source.window or weights.window != source.window:
        raise ContractError("field and weights must live on the source window")
    tw = target_op.window
    out = FieldGrid.zeros(tw, v.h, v.anchor)
    w = FieldGrid(source.window, weights.along(direction) * v.values, v.h, v.anchor).restrict(tw)
    mask = direction_mask(direction, source.send_cuts(direction), tw).values
    if full:
        region = tw.interior()
    else:
        region = transfer_region(source, direction, tw)
        if region is None:
            return TransferSource(tgt, direction, out)
    sl = tw.slices(region)
    out.values[sl] = -apply_region(target_op, w.values, region) * mask[sl]
    return TransferSource(tgt, direction, out)


def incoming(target: SubdomainWindow):
    """``(direction, source index)`` pairs feeding ``target``, in gather order."""
    pairs = []
    for d in GATHER_ORDER:
        src = (target.i - d.dx, target.j - d.dy)
        if 0 <= src[0] < target.spec.n1 and 0 <= src[1] < target.spec.n2:
            pairs.append((d, src))
    return pairs


def gather_step_sources(prev1, prev2, target: SubdomainWindow, subs, weights, target_op, h, anchor):
    """Sum of the transfers arriving at ``target`` for the next step.

    Edge transfers read the previous step's fields ``prev1``, corner
    transfers the fields from two steps back ``prev2``; both map a subdomain
    index to an array on its window or ``None`` for an exactly zero field.
    Returns ``None`` if every contribution is exactly zero.
    """
    total = None
    for d, src in incoming(target):
        field = (prev2 if d.is_corner else prev1).get(src)
        if field is None:
            continue
        s = subs[src]
        t = transfer(d, FieldGrid(s.window, field, h, anchor), s, weights[src], target_op)
        if total is None:
            total = t.contribution.values
        else:
            total = total + t.contribution.values
    return total
