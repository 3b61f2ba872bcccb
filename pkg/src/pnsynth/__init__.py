"""Maximally permissive supervisor synthesis for safe, conservative Petri nets."""

import json
from importlib.resources import files

from .model import PetriNet, build_net, load_net
from .pipeline import RunConfig, analyze, synthesize_net

__all__ = ["PetriNet", "RunConfig", "analyze", "build_net", "load_net", "production_line", "synthesize_net"]


def production_line() -> PetriNet:
    """Two-machine production line with an alternating transfer specification."""
    text = files(__package__).joinpath("nets/production_line.json").read_text(encoding="utf-8")
    return build_net(json.loads(text))
