"""Bundled demonstration instance: 3 days, 5 timeslots, 4 rooms, 7 courses
across 4 curricula, with overlapping student registrations."""

from __future__ import annotations

from importlib.resources import files

from .model import Instance, parse_instance


def sample_text() -> str:
    return files("ttsat").joinpath("data/sample.json").read_text(encoding="utf-8")


def load_sample() -> Instance:
    return parse_instance(sample_text())
