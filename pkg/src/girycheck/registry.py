"""Name-indexed store of spaces and their metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

from .metric_ot import ExtMetric, default_metric
from .spaces import ConvexSpaceSpec, builtin_spaces


@dataclass
class Registry:
    spaces: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)

    def add(self, space: ConvexSpaceSpec, metric: ExtMetric = None):
        if space.id in self.spaces:
            raise ValueError(f"duplicate space id {space.id!r}")
        self.spaces[space.id] = space
        self.metrics[space.id] = metric if metric is not None else default_metric(space)

    def space(self, space_id: str) -> ConvexSpaceSpec:
        if space_id not in self.spaces:
            raise ValueError(f"unknown space {space_id!r}")
        return self.spaces[space_id]

    def metric(self, space_id: str) -> ExtMetric:
        self.space(space_id)
        return self.metrics[space_id]

    def ids(self):
        return list(self.spaces)


def builtin_registry() -> Registry:
    reg = Registry()
    for space in builtin_spaces().values():
        reg.add(space)
    return reg
