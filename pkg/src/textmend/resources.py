"""Locations of the bundled example data and default resource loading."""

from __future__ import annotations

from importlib import resources

from .attacks import (
    AttackResources,
    PhoneticSampler,
    load_confusables,
    load_keyboard,
    load_pronunciations,
    load_typos,
)


def data_path(name: str) -> str:
    return str(resources.files("textmend") / "data" / name)


def default_attack_resources() -> AttackResources:
    """Attack resources backed by the bundled data files."""
    return AttackResources(
        keyboard=load_keyboard(data_path("keyboard_qwerty.txt")),
        typos=load_typos(data_path("typos.txt")),
        confusables=load_confusables(data_path("confusables.txt")),
        phonetic=PhoneticSampler(load_pronunciations(data_path("pronunciations.txt"))),
    )
