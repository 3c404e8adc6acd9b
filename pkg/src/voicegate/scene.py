"""Deterministic simulated object world executing catalog commands.

Objects spawn in a pile and are selected by shape/color, grabbed (lifted),
arranged into row/matrix/circle patterns at the pattern anchor, packed into
the box, or dropped. States are immutable; execute() returns a new state, so
concurrent sessions never share mutable data.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, replace

from .errors import (
    EmptySceneError,
    EmptySelectionError,
    InvalidCountError,
    UnknownCommandError,
)
from .grammar import ExecutableCommand

SHAPES = ("sphere", "hemisphere", "pyramid", "cube", "cylinder")
COLORS = ("red", "green", "blue", "yellow", "orange", "purple", "black", "white", "gray")
ALIGNMENTS = ("row", "matrix", "circle")

OBJECT_SIZE = 0.10
PILE_RADIUS = 0.5
LIFT_HEIGHT = 1.0
BOX_SIZE = 1.0
BOX_DISTANCE = 1.0  # box center, along +x from the pile
ANCHOR_DISTANCE = 2.0  # pattern anchor, along -x from the pile
DEFAULT_SPACING = 0.30
MIN_CIRCLE_RADIUS = 0.5


@dataclass(frozen=True)
class SceneObject:
    id: int
    shape: str
    color: str
    position: tuple[float, float, float]
    size: float = OBJECT_SIZE


@dataclass(frozen=True)
class ArrangementPattern:
    kind: str  # row | matrix | circle
    anchor: tuple[float, float]
    spacing: float = DEFAULT_SPACING


@dataclass(frozen=True)
class SceneState:
    objects: tuple[SceneObject, ...]
    selected: frozenset[int]
    held: frozenset[int]
    pile_center: tuple[float, float]
    rng_seed: int

    @property
    def box_center(self) -> tuple[float, float]:
        return (self.pile_center[0] + BOX_DISTANCE, self.pile_center[1])

    @property
    def pattern_anchor(self) -> tuple[float, float]:
        return (self.pile_center[0] - ANCHOR_DISTANCE, self.pile_center[1])

    def object_by_id(self, object_id: int) -> SceneObject:
        return self._index()[object_id]

    def _index(self) -> dict[int, SceneObject]:
        return {o.id: o for o in self.objects}


def spawn_pile(
    n: int, seed: int, pile_center: tuple[float, float] = (0.0, 0.0)
) -> SceneState:
    """Seeded pile of n objects: shapes cycle, colors random, disc jitter."""
    if n < 1:
        raise EmptySceneError("a scene needs at least one object")
    rng = random.Random(seed)
    objects = []
    for i in range(n):
        radius = PILE_RADIUS * math.sqrt(rng.random())
        angle = 2.0 * math.pi * rng.random()
        objects.append(
            SceneObject(
                id=i,
                shape=SHAPES[i % len(SHAPES)],
                color=rng.choice(COLORS),
                position=(
                    pile_center[0] + radius * math.cos(angle),
                    pile_center[1] + radius * math.sin(angle),
                    0.0,
                ),
            )
        )
    return SceneState(
        objects=tuple(objects),
        selected=frozenset(),
        held=frozenset(),
        pile_center=pile_center,
        rng_seed=seed,
    )


def pattern_positions(pattern: ArrangementPattern, n: int) -> list[tuple[float, float]]:
    """Floor positions for n objects in a row, matrix, or circle.

    Row runs along +x from the anchor; matrix is a row-major grid of
    ceil(sqrt(n)) columns; circle points sit at angles 2*pi*i/n on a radius
    that keeps adjacent spacing at least the requested one, never below
    MIN_CIRCLE_RADIUS.
    """
    if n < 1:
        raise InvalidCountError("pattern needs at least one point")
    ax, ay = pattern.anchor
    s = pattern.spacing
    if pattern.kind == "row":
        return [(ax + i * s, ay) for i in range(n)]
    if pattern.kind == "matrix":
        columns = math.isqrt(n - 1) + 1  # ceil(sqrt(n))
        return [(ax + (i % columns) * s, ay + (i // columns) * s) for i in range(n)]
    if pattern.kind == "circle":
        radius = max(MIN_CIRCLE_RADIUS, n * s / (2.0 * math.pi))
        return [
            (
                ax + radius * math.cos(2.0 * math.pi * i / n),
                ay + radius * math.sin(2.0 * math.pi * i / n),
            )
            for i in range(n)
        ]
    raise InvalidCountError(f"unknown pattern kind {pattern.kind!r}")


def _match(state: SceneState, shape: str, color: str | None = None) -> frozenset[int]:
    return frozenset(
        o.id
        for o in state.objects
        if o.shape == shape and (color is None or o.color == color)
    )


def _move(state: SceneState, targets: frozenset[int], positions: dict[int, tuple[float, float, float]]) -> tuple[SceneObject, ...]:
    return tuple(
        replace(o, position=positions[o.id]) if o.id in targets else o
        for o in state.objects
    )


def _set_height(state: SceneState, targets: frozenset[int], z: float) -> tuple[SceneObject, ...]:
    return tuple(
        replace(o, position=(o.position[0], o.position[1], z)) if o.id in targets else o
        for o in state.objects
    )


def execute(state: SceneState, command: ExecutableCommand) -> SceneState:
    """Apply one catalog command; unrelated objects never move.

    select replaces the selection; grab selects and lifts (held := targets);
    arrange places held-else-selected objects on pattern positions and
    releases them; put packs its targets into a grid inside the box; drop
    lowers held objects in place.
    """
    verb = command.verb
    if verb == "select":
        if command.object is None or (
            command.attribute is not None and command.attribute not in COLORS
        ):
            raise UnknownCommandError(f"cannot execute {command.id!r}")
        return replace(state, selected=_match(state, command.object, command.attribute))

    if verb == "grab":
        if command.attribute is not None:
            raise UnknownCommandError(f"cannot execute {command.id!r}")
        targets = _match(state, command.object) if command.object else state.selected
        return replace(
            state,
            objects=_set_height(state, targets, LIFT_HEIGHT),
            selected=targets,
            held=targets,
        )

    if verb == "arrange":
        if command.attribute not in ALIGNMENTS or command.object is not None:
            raise UnknownCommandError(f"cannot execute {command.id!r}")
        targets = state.held if state.held else state.selected
        if not targets:
            raise EmptySelectionError("nothing selected or held to arrange")
        pattern = ArrangementPattern(kind=command.attribute, anchor=state.pattern_anchor)
        spots = pattern_positions(pattern, len(targets))
        placed = {
            object_id: (x, y, 0.0)
            for object_id, (x, y) in zip(sorted(targets), spots)
        }
        return replace(
            state, objects=_move(state, targets, placed), held=frozenset()
        )

    if verb == "put":
        if command.attribute is not None:
            raise UnknownCommandError(f"cannot execute {command.id!r}")
        if command.object:
            targets = _match(state, command.object)
        else:
            targets = state.held if state.held else state.selected
        if not targets:
            raise EmptySelectionError("nothing to put in the box")
        columns = math.isqrt(len(targets) - 1) + 1
        cell = BOX_SIZE / columns
        bx, by = state.box_center
        min_x, min_y = bx - BOX_SIZE / 2.0, by - BOX_SIZE / 2.0
        placed = {
            object_id: (
                min_x + (i % columns + 0.5) * cell,
                min_y + (i // columns + 0.5) * cell,
                0.0,
            )
            for i, object_id in enumerate(sorted(targets))
        }
        return replace(
            state, objects=_move(state, targets, placed), held=state.held - targets
        )

    if verb == "drop":
        if command.object is not None or command.attribute is not None:
            raise UnknownCommandError(f"cannot execute {command.id!r}")
        return replace(
            state,
            objects=_set_height(state, state.held, 0.0),
            held=frozenset(),
        )

    raise UnknownCommandError(f"no scene semantics for verb {verb!r}")


def snapshot(state: SceneState) -> dict:
    """Wire document mirrored by clients; shapes the console's rendering."""
    return {
        "objects": [
            {
                "id": o.id,
                "shape": o.shape,
                "color": o.color,
                "pos": [o.position[0], o.position[1], o.position[2]],
                "selected": o.id in state.selected,
                "held": o.id in state.held,
            }
            for o in state.objects
        ],
        "box": {
            "center": [state.box_center[0], state.box_center[1]],
            "size": [BOX_SIZE, BOX_SIZE, BOX_SIZE],
        },
        "anchor": [state.pattern_anchor[0], state.pattern_anchor[1]],
        "pile": [state.pile_center[0], state.pile_center[1]],
    }


def state_digest(state: SceneState) -> str:
    """Stable hash of the full snapshot; equal states hash equal."""
    payload = json.dumps(snapshot(state), sort_keys=True).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()
