"""Command grammar: lexicon + signatures compiled into a finite command catalog.

A grammar config declares four word lists (verbs, objects, colors, alignments)
and per-verb signatures whose slots are drawn from {object, color, alignment}.
Instantiating every signature over the lexicon enumerates the full catalog of
executable commands, each with a canonical id like ``select(cube, red)``.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import CommandSyntaxError, ConfigError, UnknownCommandError, ValidationError

SLOT_KINDS = ("object", "color", "alignment")

# Lexicon names must survive normalization losslessly: single lowercase token.
_NAME_RE = re.compile(r"^[a-z][a-z0-9]*$")

# verb, optionally followed by a parenthesized argument list.
_COMMAND_ID_RE = re.compile(r"^\s*([a-z][a-z0-9]*)\s*(?:\((.*)\)\s*)?$", re.S)


@dataclass(frozen=True)
class Slot:
    kind: str
    optional: bool = False


@dataclass(frozen=True)
class Signature:
    """One allowed sentence shape for a verb: an ordered list of typed slots."""

    verb: str
    slots: tuple[Slot, ...]


@dataclass(frozen=True)
class Lexicon:
    verbs: tuple[str, ...]
    objects: tuple[str, ...]
    colors: tuple[str, ...]
    alignments: tuple[str, ...]

    @property
    def attributes(self) -> tuple[str, ...]:
        return self.colors + self.alignments

    @property
    def attribute_count(self) -> int:
        return len(self.colors) + len(self.alignments)


@dataclass(frozen=True)
class ExecutableCommand:
    """A verb with optional object and attribute arguments."""

    verb: str
    object: str | None = None
    attribute: str | None = None

    @property
    def id(self) -> str:
        """Canonical id: ``verb``, ``verb(arg)`` or ``verb(arg1, arg2)``."""
        args = [a for a in (self.object, self.attribute) if a is not None]
        return f"{self.verb}({', '.join(args)})" if args else self.verb

    def __str__(self) -> str:
        return self.id


def _require(condition: bool, message: str, path: str) -> None:
    if not condition:
        raise ConfigError(message, path)


def _validate_names(names: list, path: str) -> tuple[str, ...]:
    _require(isinstance(names, list), "expected a list of names", path)
    out: list[str] = []
    for i, name in enumerate(names):
        _require(isinstance(name, str), "expected a string", f"{path}[{i}]")
        if not _NAME_RE.match(name):
            raise ValidationError(
                f"{path}[{i}]: name {name!r} must be a lowercase ASCII word"
            )
        out.append(name)
    duplicates = {n for n in out if out.count(n) > 1}
    if duplicates:
        raise ValidationError(f"{path}: duplicate names {sorted(duplicates)}")
    return tuple(out)


def parse_grammar_config(document: str) -> tuple[Lexicon, list[Signature]]:
    """Parse and validate a grammar config JSON document.

    Schema: ``{"verbs": [...], "objects": [...], "colors": [...],
    "alignments": [...], "signatures": [{"verb": ..., "slots":
    [{"kind": ..., "optional": bool?}, ...]}, ...]}``. Unknown keys are
    rejected. Raises ConfigError for schema violations (naming the offending
    path) and ValidationError for semantic ones (duplicates, unknown slot
    kinds, dangling verb references).
    """
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}", "$") from exc
    _require(isinstance(raw, dict), "expected a JSON object", "$")

    expected_keys = {"verbs", "objects", "colors", "alignments", "signatures"}
    unknown = set(raw) - expected_keys
    _require(not unknown, f"unknown keys {sorted(unknown)}", "$")
    missing = expected_keys - set(raw)
    _require(not missing, f"missing keys {sorted(missing)}", "$")

    lexicon = Lexicon(
        verbs=_validate_names(raw["verbs"], "verbs"),
        objects=_validate_names(raw["objects"], "objects"),
        colors=_validate_names(raw["colors"], "colors"),
        alignments=_validate_names(raw["alignments"], "alignments"),
    )
    # Cross-list collisions would make argument classification ambiguous
    # (is "red" an object or a color?), so names are unique globally.
    all_names = lexicon.verbs + lexicon.objects + lexicon.colors + lexicon.alignments
    clashes = {n for n in all_names if all_names.count(n) > 1}
    if clashes:
        raise ValidationError(f"names shared across lists: {sorted(clashes)}")

    _require(isinstance(raw["signatures"], list), "expected a list", "signatures")
    signatures = [
        _parse_signature(entry, lexicon, f"signatures[{i}]")
        for i, entry in enumerate(raw["signatures"])
    ]
    return lexicon, signatures


def _parse_signature(entry: object, lexicon: Lexicon, path: str) -> Signature:
    _require(isinstance(entry, dict), "expected an object", path)
    assert isinstance(entry, dict)
    unknown = set(entry) - {"verb", "slots"}
    _require(not unknown, f"unknown keys {sorted(unknown)}", path)
    verb = entry.get("verb")
    _require(isinstance(verb, str), "missing or non-string verb", f"{path}.verb")
    if verb not in lexicon.verbs:
        raise ValidationError(f"{path}.verb: {verb!r} is not a declared verb")

    raw_slots = entry.get("slots", [])
    _require(isinstance(raw_slots, list), "expected a list", f"{path}.slots")
    slots: list[Slot] = []
    for i, raw_slot in enumerate(raw_slots):
        slot_path = f"{path}.slots[{i}]"
        _require(isinstance(raw_slot, dict), "expected an object", slot_path)
        unknown = set(raw_slot) - {"kind", "optional"}
        _require(not unknown, f"unknown keys {sorted(unknown)}", slot_path)
        kind = raw_slot.get("kind")
        if kind not in SLOT_KINDS:
            raise ValidationError(f"{slot_path}.kind: unknown slot kind {kind!r}")
        optional = raw_slot.get("optional", False)
        _require(isinstance(optional, bool), "optional must be a boolean", slot_path)
        slots.append(Slot(kind=kind, optional=optional))

    kinds = [s.kind for s in slots]
    if len(set(kinds)) != len(kinds):
        raise ValidationError(f"{path}: repeated slot kind")
    if "color" in kinds and "alignment" in kinds:
        # A command carries a single attribute; a signature mixing both
        # attribute kinds would be unrepresentable.
        raise ValidationError(f"{path}: signature mixes color and alignment slots")
    seen_optional = False
    for slot in slots:
        if slot.optional:
            seen_optional = True
        elif seen_optional:
            raise ValidationError(f"{path}: optional slot precedes a required slot")
    return Signature(verb=verb, slots=tuple(slots))


def _slot_domain(slot: Slot, lexicon: Lexicon) -> tuple[str, ...]:
    if slot.kind == "object":
        return lexicon.objects
    if slot.kind == "color":
        return lexicon.colors
    return lexicon.alignments


def enumerate_commands(
    lexicon: Lexicon, signatures: list[Signature]
) -> tuple[ExecutableCommand, ...]:
    """Full Cartesian instantiation of every signature, deduplicated and sorted.

    An optional slot contributes both its filled values and the absent case.
    """
    by_id: dict[str, ExecutableCommand] = {}
    for signature in signatures:
        choice_lists: list[tuple[str | None, ...]] = []
        for slot in signature.slots:
            domain: tuple[str | None, ...] = _slot_domain(slot, lexicon)
            if slot.optional:
                domain = (None,) + domain
            choice_lists.append(domain)
        for values in itertools.product(*choice_lists):
            obj = attr = None
            for slot, value in zip(signature.slots, values):
                if value is None:
                    continue
                if slot.kind == "object":
                    obj = value
                else:
                    attr = value
            command = ExecutableCommand(verb=signature.verb, object=obj, attribute=attr)
            by_id.setdefault(command.id, command)
    return tuple(by_id[cid] for cid in sorted(by_id))


def parse_command_text(text: str) -> tuple[str, tuple[str, ...]]:
    """Split a command id into (verb, args); purely syntactic.

    Accepts whitespace around the verb, parentheses, and commas, so the
    printed form ``select (cube, red)`` parses the same as
    ``select(cube,red)``. Raises CommandSyntaxError on malformed input.
    """
    match = _COMMAND_ID_RE.match(text)
    if not match:
        raise CommandSyntaxError(f"malformed command id: {text!r}")
    verb, arg_body = match.group(1), match.group(2)
    if arg_body is None or not arg_body.strip():
        return verb, ()
    args = tuple(a.strip() for a in arg_body.split(","))
    if len(args) > 2 or any(not _NAME_RE.match(a) for a in args):
        raise CommandSyntaxError(f"malformed command id: {text!r}")
    return verb, args


class CommandCatalog:
    """Immutable catalog: lexicon, signatures, and every enumerated command."""

    def __init__(self, lexicon: Lexicon, signatures: list[Signature]):
        self.lexicon = lexicon
        self.signatures = tuple(signatures)
        self.commands = enumerate_commands(lexicon, signatures)
        self._by_id = {c.id: c for c in self.commands}

    @classmethod
    def from_config(cls, document: str) -> "CommandCatalog":
        lexicon, signatures = parse_grammar_config(document)
        return cls(lexicon, signatures)

    @classmethod
    def from_file(cls, path: str | Path) -> "CommandCatalog":
        return cls.from_config(Path(path).read_text(encoding="utf-8"))

    def __len__(self) -> int:
        return len(self.commands)

    def __iter__(self) -> Iterator[ExecutableCommand]:
        return iter(self.commands)

    def __contains__(self, command_id: str) -> bool:
        return command_id in self._by_id

    def get(self, command_id: str) -> ExecutableCommand | None:
        return self._by_id.get(command_id)

    def parse(self, text: str) -> ExecutableCommand:
        """Parse a command id and resolve it to a catalog command.

        Raises CommandSyntaxError for malformed ids and UnknownCommandError
        for well-formed ids not present in the catalog.
        """
        verb, args = parse_command_text(text)
        obj = attr = None
        if len(args) == 1:
            if args[0] in self.lexicon.objects:
                obj = args[0]
            elif args[0] in self.lexicon.attributes:
                attr = args[0]
            else:
                raise UnknownCommandError(f"unknown argument {args[0]!r} in {text!r}")
        elif len(args) == 2:
            obj, attr = args
            if obj not in self.lexicon.objects:
                raise UnknownCommandError(f"unknown object {obj!r} in {text!r}")
            if attr not in self.lexicon.attributes:
                raise UnknownCommandError(f"unknown attribute {attr!r} in {text!r}")
        command = ExecutableCommand(verb=verb, object=obj, attribute=attr)
        resolved = self._by_id.get(command.id)
        if resolved is None:
            raise UnknownCommandError(f"command not in catalog: {command.id!r}")
        return resolved
