"""Label-wise message passing GNN with learned model selection."""

import json

from ._lwgnn import (
    DataError,
    Graph,
    NumericError,
    benchmark_graph,
    combine_predictions,
    generate_synthetic,
    gradcheck,
    homophily_ratio,
    load_graph,
    normalized_adjacency,
    parse_graph_json,
    save_graph,
)
from . import _lwgnn

__all__ = [
    "DataError",
    "Graph",
    "NumericError",
    "benchmark_graph",
    "combine_predictions",
    "default_config",
    "generate_synthetic",
    "gradcheck",
    "homophily_ratio",
    "load_graph",
    "normalized_adjacency",
    "parse_graph_json",
    "save_graph",
    "train",
]


def default_config():
    """Default training settings as a dict (the keys accepted by `train`)."""
    return json.loads(_lwgnn._default_config())


def train(graph, config=None, **overrides):
    """Train on `graph` and return the report as a dict.

    `config` and keyword overrides use the same keys as the CLI's --config file.
    """
    settings = dict(config or {})
    settings.update(overrides)
    return json.loads(_lwgnn._train(graph, json.dumps(settings) if settings else ""))
