"""JSON spec documents and their canonical hash."""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from app.core.errors import InvalidArgumentError
from app.models.code import HoscSpec
from app.models.dts import DifferenceTriangleSet, Ruler
from app.models.net import NetSpec
from app.services.construction import build_spec

logger = logging.getLogger(__name__)

SPEC_FORMAT = "hosc-spec/1"


def spec_document(spec: HoscSpec) -> dict[str, Any]:
    """The defining parameters of a spec; derived fields are rebuilt on load."""
    return {
        "format": SPEC_FORMAT,
        "L": spec.L,
        "M": spec.M,
        "block_side": spec.block_side,
        "chains": spec.chains,
        "r": spec.r,
        "structure_only": spec.component is None,
        "dts": [list(r.marks) for r in spec.dts.rulers],
        "net": {
            "block_side": spec.net.block_side,
            "matrices": [list(m) for m in spec.net.matrices],
        },
        "combined_ruler": list(spec.combined_ruler),
        "perm_assignment": list(spec.perm_assignment),
    }


def spec_hash(spec: HoscSpec) -> str:
    """SHA-256 of the canonical (sorted keys, compact) JSON document."""
    canonical = json.dumps(spec_document(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def spec_from_document(document: dict[str, Any]) -> HoscSpec:
    """
    Rebuild and validate a spec from its document.

    Args:
        document: Parsed JSON document

    Returns:
        The resolved spec

    Raises:
        InvalidArgumentError: On an unknown format, missing keys or derived fields that
            disagree with the rebuilt spec
    """
    if document.get("format") != SPEC_FORMAT:
        raise InvalidArgumentError(f"unsupported spec format {document.get('format')!r}")
    try:
        dts = DifferenceTriangleSet(rulers=tuple(Ruler(marks=tuple(m)) for m in document["dts"]))
        net = NetSpec(
            block_side=document["net"]["block_side"],
            matrices=tuple(tuple(m) for m in document["net"]["matrices"]),
        )
        spec = build_spec(
            L=document["L"],
            M=document["M"],
            block_side=document["block_side"],
            chains=document["chains"],
            dts=dts,
            net=net,
            r=document.get("r"),
            structure_only=bool(document.get("structure_only", False)),
        )
    except KeyError as exc:
        raise InvalidArgumentError(f"spec document is missing {exc.args[0]!r}") from exc
    except ValidationError as exc:
        raise InvalidArgumentError(f"invalid spec document: {exc}") from exc

    for key in ("combined_ruler", "perm_assignment"):
        if key in document and tuple(document[key]) != getattr(spec, key):
            raise InvalidArgumentError(
                f"{key} {document[key]} disagrees with the rebuilt {getattr(spec, key)}"
            )
    return spec


class SpecRepository:
    """Stores resolved specs as JSON documents."""

    def __init__(self, root: Path | None = None) -> None:
        """
        Initialize the repository.

        Args:
            root: Directory relative paths are resolved against (current directory if None)
        """
        self.root = root or Path.cwd()

    def _path(self, path: Path | str) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.root / path

    def save(self, path: Path | str, spec: HoscSpec) -> Path:
        """
        Write a spec document.

        Args:
            path: Destination JSON file
            spec: Spec to store

        Returns:
            The path written
        """
        target = self._path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        document = spec_document(spec) | {"sha256": spec_hash(spec)}
        target.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
        logger.info(f"wrote spec {document['sha256'][:12]} to {target}")
        return target

    def load(self, path: Path | str) -> HoscSpec:
        """
        Read, rebuild and validate a spec document.

        Args:
            path: JSON file written by :meth:`save`

        Returns:
            The resolved spec

        Raises:
            InvalidArgumentError: If the file is not valid JSON or the stored hash mismatches
        """
        source = self._path(path)
        try:
            document = json.loads(source.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"{source} is not valid JSON: {exc}") from exc
        spec = spec_from_document(document)
        stored = document.get("sha256")
        if stored is not None and stored != spec_hash(spec):
            raise InvalidArgumentError(f"{source}: stored hash does not match the contents")
        return spec
