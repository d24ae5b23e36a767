__all__ = [
    "assignments",
    "blocktree",
    "coupling",
    "errors",
    "hypergraph",
    "oracle",
    "projection",
    "sampler",
    "workbench",
]
