"""Closest/second-closest assignment bookkeeping and exact swap evaluation.

For a facility set S and region u, phi1(u)/phi2(u) are the closest and
second-closest placed facilities under the (distance, node id) order, so
ties always resolve to the lower id. The access cost of one type is
sum_u h_u * d(u, phi1(u)); a swap (insert i, remove r) changes it by
exactly loss(r) - gain(i) - extra(i, r).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .instances import ProblemInstance

NO_FACILITY = -1


class SwapError(ValueError):
    """A swap or assignment operation violated its preconditions."""


@dataclass
class AssignmentState:
    """Per-type solution state with cached assignments and access cost."""

    instance: ProblemInstance
    ftype: str
    facilities: np.ndarray  # sorted node ids
    phi1: np.ndarray  # closest facility per region
    phi2: np.ndarray  # second closest, NO_FACILITY when |S| < 2
    d1: np.ndarray
    d2: np.ndarray  # +inf when |S| < 2
    ac: float

    @property
    def p(self) -> int:
        return int(self.facilities.shape[0])

    def facility_set(self) -> set[int]:
        return set(int(f) for f in self.facilities)

    def copy(self) -> "AssignmentState":
        return AssignmentState(
            instance=self.instance,
            ftype=self.ftype,
            facilities=self.facilities.copy(),
            phi1=self.phi1.copy(),
            phi2=self.phi2.copy(),
            d1=self.d1.copy(),
            d2=self.d2.copy(),
            ac=self.ac,
        )


@dataclass(frozen=True)
class SwapComponents:
    """Exact decomposition of one swap's access-cost change.

    gain: saving if the insert node were added alone.
    loss: penalty if the remove node were dropped alone.
    extra: non-negative correction for doing both at once.
    delta = loss - gain - extra, the signed AC change.
    """

    gain: float
    loss: float
    extra: float

    @property
    def delta(self) -> float:
        return self.loss - self.gain - self.extra


def _top2(instance: ProblemInstance, facs: np.ndarray, rows: np.ndarray | None = None):
    """Closest and second-closest facility per region by (distance, id)."""
    if rows is None:
        dmat = instance.columns(facs)
    else:
        dmat = instance.pairwise(rows, facs)
    # facs is sorted ascending, so a stable sort on distance breaks ties
    # toward the lower node id
    order = np.argsort(dmat, axis=1, kind="stable")
    phi1 = facs[order[:, 0]]
    d1 = np.take_along_axis(dmat, order[:, :1], axis=1)[:, 0]
    if facs.shape[0] >= 2:
        phi2 = facs[order[:, 1]]
        d2 = np.take_along_axis(dmat, order[:, 1:2], axis=1)[:, 0]
    else:
        m = dmat.shape[0]
        phi2 = np.full(m, NO_FACILITY, dtype=np.int64)
        d2 = np.full(m, np.inf)
    return phi1, phi2, d1, d2


def _validated_facilities(instance: ProblemInstance, facilities: Iterable[int]) -> np.ndarray:
    facs = np.unique(np.asarray(sorted(int(f) for f in facilities), dtype=np.int64))
    if facs.shape[0] == 0:
        raise SwapError("facility set must be non-empty")
    if facs[0] < 0 or facs[-1] >= instance.n:
        raise SwapError(f"facility ids must lie in 0..{instance.n - 1}")
    return facs


def build_assignment(
    instance: ProblemInstance, ftype: str, facilities: Iterable[int]
) -> AssignmentState:
    """Compute phi1/phi2/d1/d2 and the access cost from scratch."""
    if ftype not in instance.demands:
        raise SwapError(f"unknown facility type {ftype!r}")
    facs = _validated_facilities(instance, facilities)
    phi1, phi2, d1, d2 = _top2(instance, facs)
    h = instance.demands[ftype]
    return AssignmentState(
        instance=instance,
        ftype=ftype,
        facilities=facs,
        phi1=phi1,
        phi2=phi2,
        d1=d1,
        d2=d2,
        ac=float(np.dot(h, d1)),
    )


def access_cost_total(states: Mapping[str, AssignmentState]) -> float:
    """Total access cost over all declared types."""
    if not states:
        raise SwapError("no assignment states given")
    declared = next(iter(states.values())).instance.types
    missing = [k for k in declared if k not in states]
    if missing:
        raise SwapError(f"missing assignment state for type(s) {missing}")
    return float(sum(states[k].ac for k in declared))


def _check_swap_args(state: AssignmentState, insert: int, remove: int):
    n = state.instance.n
    if not (0 <= insert < n and 0 <= remove < n):
        raise SwapError(f"node ids must lie in 0..{n - 1}")
    facs = state.facility_set()
    if insert in facs:
        raise SwapError(f"insert node {insert} is already occupied")
    if remove not in facs:
        raise SwapError(f"remove node {remove} holds no facility")


def swap_components(state: AssignmentState, insert: int, remove: int) -> SwapComponents:
    """Exact gain/loss/extra for moving the facility at remove to insert.

    Requires at least two facilities; with a single one the second-closest
    assignment is undefined and callers must fall back to a full rebuild.
    """
    insert, remove = int(insert), int(remove)
    _check_swap_args(state, insert, remove)
    if state.p < 2:
        raise SwapError("swap decomposition needs at least two facilities")
    h = state.instance.demands[state.ftype]
    di = state.instance.dist_to_all(insert)
    gain = float(np.dot(h, np.maximum(0.0, state.d1 - di)))
    cluster = state.phi1 == remove
    hc = h[cluster]
    # for regions served by remove, d(u, remove) is the cached d1
    loss = float(np.dot(hc, state.d2[cluster] - state.d1[cluster]))
    extra = float(
        np.dot(
            hc,
            np.maximum(0.0, state.d2[cluster] - np.maximum(di[cluster], state.d1[cluster])),
        )
    )
    return SwapComponents(gain=gain, loss=loss, extra=extra)


def exact_swap_delta(state: AssignmentState, insert: int, remove: int) -> float:
    """AC change of one swap; works for any facility count."""
    if state.p >= 2:
        return swap_components(state, insert, remove).delta
    _check_swap_args(state, int(insert), int(remove))
    h = state.instance.demands[state.ftype]
    new_ac = float(np.dot(h, state.instance.dist_to_all(int(insert))))
    return new_ac - state.ac


def _less(da: np.ndarray, ia, db: np.ndarray, ib) -> np.ndarray:
    """Elementwise (distance, id) lexicographic comparison."""
    return (da < db) | ((da == db) & np.less(ia, ib))


def apply_swap(state: AssignmentState, insert: int, remove: int) -> AssignmentState:
    """Return the state after the swap, updating assignments incrementally.

    Only regions whose closest or second-closest facility is the removed
    node, or for which the inserted node enters the top two, are touched;
    the result is indistinguishable from a from-scratch rebuild.
    """
    insert, remove = int(insert), int(remove)
    _check_swap_args(state, insert, remove)
    instance = state.instance
    new_facs = np.sort(
        np.concatenate([state.facilities[state.facilities != remove], [insert]])
    ).astype(np.int64)
    if state.p < 2:
        return build_assignment(instance, state.ftype, new_facs)

    di = instance.dist_to_all(insert)
    phi1 = state.phi1.copy()
    phi2 = state.phi2.copy()
    d1 = state.d1.copy()
    d2 = state.d2.copy()

    lost1 = phi1 == remove
    lost2 = phi2 == remove
    ins_beats1 = _less(di, insert, d1, phi1)
    ins_beats2 = _less(di, insert, d2, phi2)

    # closest facility removed: if the insert beats the old second-closest
    # it takes over and the runner-up stands; otherwise the new runner-up
    # is unknown and the region must be rescanned
    m = lost1 & ins_beats2
    phi1[m], d1[m] = insert, di[m]
    rescan = lost1 & ~ins_beats2

    # second-closest removed: any facility outside the old top two is
    # farther than the old d2, so the insert wins outright when it beats it
    m = lost2 & ins_beats1
    phi2[m], d2[m] = state.phi1[m], state.d1[m]
    phi1[m], d1[m] = insert, di[m]
    m = lost2 & ~ins_beats1 & ins_beats2
    phi2[m], d2[m] = insert, di[m]
    rescan |= lost2 & ~ins_beats1 & ~ins_beats2

    # top two intact: the insert may still push into them
    free = ~lost1 & ~lost2
    m = free & ins_beats1
    phi2[m], d2[m] = state.phi1[m], state.d1[m]
    phi1[m], d1[m] = insert, di[m]
    m = free & ~ins_beats1 & ins_beats2
    phi2[m], d2[m] = insert, di[m]

    rows = np.nonzero(rescan)[0]
    if rows.shape[0]:
        r1, r2, rd1, rd2 = _top2(instance, new_facs, rows)
        phi1[rows], phi2[rows], d1[rows], d2[rows] = r1, r2, rd1, rd2

    h = instance.demands[state.ftype]
    return AssignmentState(
        instance=instance,
        ftype=state.ftype,
        facilities=new_facs,
        phi1=phi1,
        phi2=phi2,
        d1=d1,
        d2=d2,
        ac=float(np.dot(h, d1)),
    )


def loss_per_facility(state: AssignmentState) -> np.ndarray:
    """loss(r) for every node, zero on vacant nodes. Needs |S| >= 2."""
    if state.p < 2:
        raise SwapError("loss is undefined with fewer than two facilities")
    h = state.instance.demands[state.ftype]
    return np.bincount(
        state.phi1, weights=h * (state.d2 - state.d1), minlength=state.instance.n
    )


def far_radius_per_facility(state: AssignmentState) -> np.ndarray:
    """Per occupied node r: max over its cluster of d(u, r) + d2(u).

    Any insert at distance >= this radius from r provably has extra = 0
    (triangle inequality), -inf for facilities serving no region.
    """
    if state.p < 2:
        raise SwapError("far radius is undefined with fewer than two facilities")
    out = np.full(state.instance.n, -np.inf)
    np.maximum.at(out, state.phi1, state.d1 + state.d2)
    return out


def gain_per_node(state: AssignmentState, vacant: np.ndarray | None = None):
    """gain(i) for each vacant node (occupied nodes always gain zero).

    Returns (vacant ids, gains, n x |vacant| distance submatrix).
    """
    if vacant is None:
        mask = np.ones(state.instance.n, dtype=bool)
        mask[state.facilities] = False
        vacant = np.nonzero(mask)[0]
    dv = state.instance.columns(vacant)
    h = state.instance.demands[state.ftype]
    gains = np.maximum(0.0, state.d1[:, None] - dv).T @ h
    return vacant, gains, dv


def edge_deltas(state: AssignmentState, edges: np.ndarray) -> np.ndarray:
    """Exact AC change for each (insert, remove) pair in edges."""
    edges = np.asarray(edges, dtype=np.int64)
    if edges.shape[0] == 0:
        return np.zeros(0)
    if state.p < 2:
        h = state.instance.demands[state.ftype]
        acs = state.instance.columns(edges[:, 0]).T @ h
        return acs - state.ac
    h = state.instance.demands[state.ftype]
    out = np.empty(edges.shape[0])
    for r in np.unique(edges[:, 1]):
        sel = edges[:, 1] == r
        inserts = edges[sel, 0]
        cluster = np.nonzero(state.phi1 == r)[0]
        dmat = state.instance.columns(inserts)
        gains = np.maximum(0.0, state.d1[:, None] - dmat).T @ h
        hc = h[cluster]
        loss = float(np.dot(hc, state.d2[cluster] - state.d1[cluster]))
        extras = (
            np.maximum(
                0.0,
                state.d2[cluster][:, None]
                - np.maximum(dmat[cluster], state.d1[cluster][:, None]),
            ).T
            @ hc
        )
        out[sel] = loss - gains - extras
    return out


def all_swap_deltas(state: AssignmentState):
    """Exact AC change for every Eq.-3 edge.

    Returns (vacant ids, occupied ids, delta matrix of shape
    |vacant| x |occupied|). Works for any facility count.
    """
    instance = state.instance
    mask = np.ones(instance.n, dtype=bool)
    mask[state.facilities] = False
    vacant = np.nonzero(mask)[0]
    occ = state.facilities
    h = instance.demands[state.ftype]
    if state.p < 2:
        acs = instance.columns(vacant).T @ h
        return vacant, occ, (acs - state.ac)[:, None]
    _, gains, dv = gain_per_node(state, vacant)
    deltas = np.empty((vacant.shape[0], occ.shape[0]))
    for col, r in enumerate(occ):
        cluster = np.nonzero(state.phi1 == r)[0]
        hc = h[cluster]
        loss = float(np.dot(hc, state.d2[cluster] - state.d1[cluster]))
        extras = (
            np.maximum(
                0.0,
                state.d2[cluster][:, None]
                - np.maximum(dv[cluster], state.d1[cluster][:, None]),
            ).T
            @ hc
        )
        deltas[:, col] = loss - gains - extras
    return vacant, occ, deltas
