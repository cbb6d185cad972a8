"""Exact configuration probabilities via history-tracking pair tables.

One step of the evolution is computed by seeding a table of
(previous-config, current-config) pairs with ``(c, c)`` entries weighted by
the step-t distribution and then folding a per-node update over all nodes.
The frozen first component keeps the information the per-node update needs
(which nodes were failed before the step started) while the second
component accumulates the new states. Exponential in k, which is fine for
the desk-scale models this package targets.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError
from .model import NetworkModel, format_config, validate

__all__ = ["DistributionTable", "PairTable", "evolve_node", "evaluate", "marginal"]


@dataclass(frozen=True)
class DistributionTable:
    """Probability of each configuration at one time step."""

    k: int
    probs: dict[int, float]

    def probability(self, config: int) -> float:
        return self.probs.get(config, 0.0)

    def by_string(self) -> dict[str, float]:
        """Probabilities keyed by most-significant-node-first strings."""
        return {format_config(c, self.k): p for c, p in sorted(self.probs.items())}

    def total(self) -> float:
        return sum(self.probs.values())


@dataclass(frozen=True)
class PairTable:
    """Mid-step mass on (previous-config, current-config) pairs."""

    k: int
    entries: dict[tuple[int, int], float]

    def total(self) -> float:
        return sum(self.entries.values())


def evolve_node(table: PairTable, model: NetworkModel, node: int) -> PairTable:
    """Split every pair's mass according to node ``node``'s transition.

    For an entry ((b, c), w): if b has the node failed, the mass splits into
    stay-failed (1 - p_recover) and recovered (p_recover); if b has it good,
    it splits into stay-good p_off = (1 - p_fail) * prod(1 - p_trigger[m][node])
    over nodes m failed in b, and newly-failed 1 - p_off. b never changes.
    Zero-weight outcomes are pruned.
    """
    if not (1 <= node <= model.k):
        raise ValidationError(f"node {node} outside 1..{model.k}", code="invalid-node-index")
    i = node - 1
    bit = 1 << i
    p_rec = model.p_recover[i]
    p_fail = model.p_fail[i]
    out: dict[tuple[int, int], float] = {}

    def add(key: tuple[int, int], w: float) -> None:
        if w != 0.0:
            out[key] = out.get(key, 0.0) + w

    for (b, c), w in table.entries.items():
        if b & bit:
            add((b, c | bit), w * (1.0 - p_rec))
            add((b, c & ~bit), w * p_rec)
        else:
            p_off = 1.0 - p_fail
            for m in range(model.k):
                if (b >> m) & 1:
                    p_off *= 1.0 - model.p_trigger[m][i]
            add((b, c & ~bit), w * p_off)
            add((b, c | bit), w * (1.0 - p_off))
    return PairTable(table.k, out)


def evaluate(model: NetworkModel, horizon: int) -> list[DistributionTable]:
    """Distributions for t = 0..horizon; t=0 is all-good with probability 1."""
    validate(model)
    if horizon < 0:
        raise ValidationError("horizon must be >= 0", code="invalid-horizon")
    dists = [DistributionTable(model.k, {0: 1.0})]
    for _ in range(horizon):
        table = PairTable(model.k, {(c, c): p for c, p in dists[-1].probs.items() if p != 0.0})
        for node in range(1, model.k + 1):
            table = evolve_node(table, model, node)
        probs: dict[int, float] = {}
        for (_, c), w in table.entries.items():
            probs[c] = probs.get(c, 0.0) + w
        dists.append(DistributionTable(model.k, probs))
    return dists


def marginal(table: DistributionTable, nodes: Sequence[int], states: Sequence[int]) -> float:
    """Probability that each node in ``nodes`` (1-based) is in its given state."""
    if not nodes:
        raise ValidationError("marginal needs at least one node", code="invalid-node-index")
    if len(set(nodes)) != len(nodes):
        raise ValidationError("marginal nodes must be distinct", code="invalid-node-index")
    if len(states) != len(nodes):
        raise ValidationError("one state bit per node required", code="invalid-configuration")
    for n in nodes:
        if not (1 <= n <= table.k):
            raise ValidationError(f"node {n} outside 1..{table.k}", code="invalid-node-index")
    for s in states:
        if s not in (0, 1):
            raise ValidationError(f"state {s!r} is not 0 or 1", code="invalid-configuration")
    total = 0.0
    for c, p in table.probs.items():
        if all((c >> (n - 1)) & 1 == s for n, s in zip(nodes, states)):
            total += p
    return total
