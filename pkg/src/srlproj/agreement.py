"""Krippendorff's alpha with binary (nominal) distance over annotator
selections.

A unit is one markable: a (sentence, source item) pair. A unit's value is the
canonicalized target selection (sorted token indices) or the NONE sentinel,
compared for plain equality. Units coded by fewer than two coders are
excluded, the standard missing-data treatment.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .curation import (AnnotationResponse, AnnotationTask, NONE_VALUE,
                       argument_key, predicate_key)
from .errors import AgreementError


@dataclass
class ReliabilityData:
    """Sparse (unit, coder) -> categorical value map."""

    units: list[Hashable] = field(default_factory=list)
    coders: list[str] = field(default_factory=list)
    values: dict[tuple[Hashable, str], Hashable] = field(default_factory=dict)

    def code(self, unit: Hashable, coder: str, value: Hashable) -> None:
        if unit not in self.units:
            self.units.append(unit)
        if coder not in self.coders:
            self.coders.append(coder)
        self.values[(unit, coder)] = value

    def unit_values(self) -> list[list[Hashable]]:
        by_unit: dict[Hashable, list[Hashable]] = defaultdict(list)
        for (unit, _coder), value in self.values.items():
            by_unit[unit].append(value)
        return [by_unit[u] for u in self.units if u in by_unit]


def krippendorff_alpha(data: ReliabilityData) -> float:
    """alpha = 1 - D_o / D_e over the coincidence matrix.

    With binary distance the disagreement terms reduce to the off-diagonal
    mass of the matrix resp. the cross products of the value marginals.
    """
    if len(data.coders) < 2:
        raise AgreementError(f"need >= 2 coders, have {len(data.coders)}")
    units = [vals for vals in data.unit_values() if len(vals) >= 2]
    if not units:
        raise AgreementError("no unit carries two or more coded values")

    # coincidence counts: each ordered within-unit pair adds 1/(m_u - 1)
    coincidence: Counter = Counter()
    marginals: Counter = Counter()
    n = 0.0
    for values in units:
        m_u = len(values)
        weight = 1.0 / (m_u - 1)
        n += m_u
        for a_pos, a in enumerate(values):
            marginals[a] += 1
            for b_pos, b in enumerate(values):
                if a_pos != b_pos:
                    coincidence[(a, b)] += weight

    if len(marginals) < 2:
        raise AgreementError(
            "expected disagreement is zero: all coded values are identical")

    disagree_observed = sum(count for (a, b), count in coincidence.items()
                            if a != b) / n
    disagree_expected = sum(
        marginals[a] * marginals[b]
        for a in marginals for b in marginals if a != b
    ) / (n * (n - 1))
    return 1.0 - disagree_observed / disagree_expected


UNIT_PREDICATES = "predicates"
UNIT_ROLES = "roles"


def canonical_value(selection) -> Hashable:
    """Comparable value for a markable: sorted index tuple or NONE."""
    if selection is None:
        return NONE_VALUE
    return tuple(sorted(selection))


def reliability_from_responses(tasks: Sequence[AnnotationTask],
                               responses: Sequence[AnnotationResponse],
                               unit_kind: str = UNIT_PREDICATES,
                               first_n: int | None = None) -> ReliabilityData:
    """Build reliability data from annotation responses.

    `unit_kind` selects predicate markables or role (argument) markables,
    mirroring the per-category agreement split; `first_n` restricts to the
    first n tasks, the usual shared calibration sample.
    """
    if unit_kind not in (UNIT_PREDICATES, UNIT_ROLES):
        raise AgreementError(f"unknown unit kind {unit_kind!r}")
    selected = tasks[:first_n] if first_n is not None else list(tasks)
    wanted: dict[str, set[str]] = {}
    for task in selected:
        keys = set()
        for pos, pred in enumerate(task.predicates):
            if unit_kind == UNIT_PREDICATES:
                keys.add(predicate_key(pos))
            else:
                keys.update(argument_key(pos, idx) for idx, _ in pred.arguments)
        wanted[task.task_id] = keys

    data = ReliabilityData()
    for response in responses:
        keys = wanted.get(response.task_id)
        if keys is None:
            continue
        for key, markable in response.markables.items():
            if key not in keys:
                continue
            data.code((response.task_id, key), response.coder_id,
                      canonical_value(markable.selection))
    return data
