"""Model manifest records: what a parameter set contains, for run metadata."""

from __future__ import annotations


def model_manifest(name: str, model, seed=None) -> dict:
    """Summarize one model: its layer groups and parameter count."""
    groups = sorted({param_name.rsplit(".", 1)[0] for param_name in model.params.names()})
    out = {
        "model": name,
        "architecture": groups,
        "parameter_count": model.params.num_values(),
    }
    if seed is not None:
        out["seed"] = seed
    return out
