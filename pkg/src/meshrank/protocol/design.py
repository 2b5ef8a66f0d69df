"""Stimuli, experiment designs, and pair generation."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

from ..errors import DesignError

DEFAULT_PROMPT = "which polygonal mesh had higher quality"


class ShadingMode(str, enum.Enum):
    UNLIT = "unlit"
    LAMBERT = "lambert"


@dataclass(frozen=True)
class Stimulus:
    id: str
    mesh_ref: str
    quality: int  # triangle count, orders the ladder
    shading: ShadingMode = ShadingMode.UNLIT
    texture_ref: str | None = None

    def __post_init__(self):
        if self.quality <= 0:
            raise DesignError(f"stimulus {self.id!r}: quality must be positive")


def generate_pairs(stimuli: list[Stimulus] | tuple[Stimulus, ...]) -> list[tuple[str, str]]:
    """All n(n-1)/2 unordered pairs, each canonical: lower id first."""
    if len(stimuli) < 2:
        raise DesignError("a design needs at least 2 stimuli")
    ids = [s.id for s in stimuli]
    if len(set(ids)) != len(ids):
        raise DesignError("stimulus ids must be unique")
    pairs = []
    for a, b in itertools.combinations(ids, 2):
        pairs.append((a, b) if a < b else (b, a))
    return pairs


@dataclass(frozen=True)
class ExperimentDesign:
    stimuli: tuple[Stimulus, ...]
    prompt: str = DEFAULT_PROMPT
    pairs: tuple[tuple[str, str], ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "stimuli", tuple(self.stimuli))
        object.__setattr__(self, "pairs", tuple(generate_pairs(self.stimuli)))

    @property
    def n(self) -> int:
        return len(self.stimuli)

    def stimulus(self, stimulus_id: str) -> Stimulus:
        for s in self.stimuli:
            if s.id == stimulus_id:
                return s
        raise KeyError(stimulus_id)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.stimuli)


def design_to_dict(design: ExperimentDesign) -> dict:
    return {
        "prompt": design.prompt,
        "stimuli": [
            {
                "id": s.id,
                "mesh_ref": s.mesh_ref,
                "quality": s.quality,
                "shading": s.shading.value,
                "texture_ref": s.texture_ref,
            }
            for s in design.stimuli
        ],
    }


def design_from_dict(doc: dict) -> ExperimentDesign:
    try:
        stimuli = tuple(
            Stimulus(
                id=item["id"],
                mesh_ref=item["mesh_ref"],
                quality=int(item["quality"]),
                shading=ShadingMode(item.get("shading", "unlit")),
                texture_ref=item.get("texture_ref"),
            )
            for item in doc["stimuli"]
        )
        prompt = doc.get("prompt", DEFAULT_PROMPT)
    except (KeyError, TypeError, ValueError) as exc:
        raise DesignError(f"malformed design document: {exc}") from exc
    return ExperimentDesign(stimuli=stimuli, prompt=prompt)


def full_factorial(
    meshes: list[tuple[str, int]],
    shadings: list[ShadingMode],
    prompt: str = DEFAULT_PROMPT,
    textures: dict[str, str] | None = None,
) -> ExperimentDesign:
    """Cross every (mesh_ref, quality) with every shading mode.

    Stimulus ids are ``<mesh stem>:<shading>`` so a 4-mesh x 2-shading
    grid yields 8 uniquely named stimuli.
    """
    if not meshes or not shadings:
        raise DesignError("full factorial needs at least one mesh and one shading")
    textures = textures or {}
    stimuli = []
    for mesh_ref, quality in meshes:
        stem = mesh_ref.rsplit("/", 1)[-1]
        stem = stem[: -len(".obj")] if stem.endswith(".obj") else stem
        for shading in shadings:
            stimuli.append(
                Stimulus(
                    id=f"{stem}:{shading.value}",
                    mesh_ref=mesh_ref,
                    quality=quality,
                    shading=shading,
                    texture_ref=textures.get(mesh_ref),
                )
            )
    return ExperimentDesign(stimuli=tuple(stimuli), prompt=prompt)
