import random

import pytest

from meshrank.objio import Mesh
from meshrank.protocol.design import ExperimentDesign, ShadingMode, Stimulus
from meshrank.protocol.session import Phase, build_schedule, record_choice

PAPER_LADDER = (1000, 5000, 10000, 20000)


def make_design(qualities=PAPER_LADDER, shadings=("unlit",), prompt=None):
    stimuli = []
    for q in qualities:
        for s in shadings:
            stimuli.append(
                Stimulus(
                    id=f"m{q}:{s}" if len(shadings) > 1 else f"m{q}",
                    mesh_ref=f"m{q}.obj",
                    quality=q,
                    shading=ShadingMode(s),
                )
            )
    kwargs = {"prompt": prompt} if prompt else {}
    return ExperimentDesign(stimuli=tuple(stimuli), **kwargs)


@pytest.fixture
def ladder_design():
    return make_design()


@pytest.fixture
def factorial_design():
    return make_design(shadings=("unlit", "lambert"))


def drive_session(design, seed, choose, started_at=0.0):
    """Run a session to the questionnaire phase with a choice function.

    ``choose(presentation, design)`` returns the chosen stimulus id.
    """
    state = build_schedule(design, seed, started_at=started_at)
    t = started_at
    while state.pending:
        head = state.current_presentation()
        t += 1.0
        record_choice(state, head.presentation_id, choose(head, design), 1.0, at=t)
    assert state.phase is Phase.QUESTIONNAIRE
    return state


def choose_higher_quality(presentation, design):
    a, b = presentation.pair
    qa = design.stimulus(a).quality
    qb = design.stimulus(b).quality
    if qa != qb:
        return a if qa > qb else b
    return a


def choose_first(presentation, design):
    return presentation.pair[0]


def random_mesh(rng: random.Random, max_vertices=12, max_faces=16, with_uvs=True) -> Mesh:
    n_vertices = rng.randint(3, max_vertices)
    vertices = [
        (rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10))
        for _ in range(n_vertices)
    ]
    if with_uvs:
        n_uvs = rng.randint(1, 8)
        uvs = [(rng.random(), rng.random()) for _ in range(n_uvs)]
    else:
        uvs = []
    faces = []
    for _ in range(rng.randint(0, max_faces)):
        v_ids = rng.sample(range(n_vertices), 3)
        if with_uvs:
            corners = tuple((v, rng.randrange(len(uvs))) for v in v_ids)
        else:
            corners = tuple((v, -1) for v in v_ids)
        faces.append(corners)
    return Mesh(vertices=vertices, uvs=uvs, faces=faces, name=f"rand{rng.random():.3f}")
