"""
JSON records for curves, sections and stable supercurves, and CSV output.

Complex numbers are stored as ``[re, im]`` pairs, Moebius transforms as their
8 reals. Parse errors carry the JSON path of the offending field.
"""

from __future__ import annotations

import csv
import json
from logging import getLogger
from pathlib import Path
from typing import IO, Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from supercurves.exceptions import InvalidInputError, TreeError
from supercurves.fields import GlobalCurve, SuperSection
from supercurves.geometry import LineBundleSpec, MoebiusTransform, SpherePoint, TargetKind, parse_target
from supercurves.moduli.stable import StableSupercurve
from supercurves.moduli.trees import LabelledTree
from supercurves.quadrature import Annulus, Disc, Region, Sphere

logger = getLogger(__name__)

Member = Tuple[GlobalCurve, SuperSection]
ComplexArray = npt.NDArray[np.complex128]
Witness = Tuple[Tuple[int, ...], Dict[int, MoebiusTransform]]


def _require(record: Dict[str, Any], key: str, path: str) -> Any:
    if not isinstance(record, dict):
        raise InvalidInputError("expected a JSON object", path)
    if key not in record:
        raise InvalidInputError(f"missing field {key!r}", path)
    return record[key]


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidInputError(f"expected an integer, got {value!r}", path)
    return value


def _real(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidInputError(f"expected a number, got {value!r}", path)
    return float(value)


def complex_from_record(value: Any, path: str) -> complex:
    if not isinstance(value, list) or len(value) != 2:
        raise InvalidInputError(f"expected a [re, im] pair, got {value!r}", path)
    return complex(_real(value[0], f"{path}[0]"), _real(value[1], f"{path}[1]"))


def complex_to_record(value: complex) -> List[float]:
    return [float(value.real), float(value.imag)]


def _coefficient_rows(value: Any, path: str) -> ComplexArray:
    if not isinstance(value, list) or not value:
        raise InvalidInputError("expected a nonempty list of coefficient rows", path)
    rows = []
    for row_index, row in enumerate(value):
        if not isinstance(row, list):
            raise InvalidInputError("expected a list of [re, im] pairs", f"{path}[{row_index}]")
        rows.append(
            [complex_from_record(entry, f"{path}[{row_index}][{index}]") for index, entry in enumerate(row)]
        )
    lengths = {len(row) for row in rows}
    if len(lengths) != 1:
        raise InvalidInputError(f"rows have different lengths {sorted(lengths)}", path)
    return np.array(rows, dtype=np.complex128).reshape(len(rows), lengths.pop())


def _rows_to_record(coefficients: ComplexArray) -> List[List[List[float]]]:
    return [[complex_to_record(complex(entry)) for entry in row] for row in coefficients]


def curve_from_record(record: Dict[str, Any], path: str = "$") -> Member:
    """Parse a curve record with its optional ``section`` (``psi = 0``, ``d = -1`` when absent)."""
    target = parse_target(str(_require(record, "target", path)), f"{path}.target")
    dimension = _integer(_require(record, "dim", path), f"{path}.dim")
    degree = _integer(_require(record, "degree", path), f"{path}.degree")
    coefficients = _coefficient_rows(_require(record, "components", path), f"{path}.components")
    rows = dimension + 1 if target is TargetKind.PROJECTIVE else dimension
    if dimension < 1:
        raise InvalidInputError(f"the target dimension must be positive, got {dimension}", f"{path}.dim")
    if coefficients.shape != (rows, degree + 1):
        raise InvalidInputError(
            f"expected {rows} rows of {degree + 1} coefficients, got shape {coefficients.shape}",
            f"{path}.components",
        )
    try:
        curve = GlobalCurve(target, coefficients)
    except InvalidInputError as error:
        raise InvalidInputError(str(error), f"{path}.components") from error
    section_record = record.get("section")
    if section_record is None:
        return curve, SuperSection.zero(curve, -1)
    return curve, section_from_record(curve, section_record, f"{path}.section")


def section_from_record(curve: GlobalCurve, record: Dict[str, Any], path: str) -> SuperSection:
    bundle_degree = _integer(_require(record, "bundle_degree", path), f"{path}.bundle_degree")
    if bundle_degree == 0:
        raise InvalidInputError(
            "d = 0 is refused: the super energy is undefined", f"{path}.bundle_degree"
        )
    derivative = 0j
    if "derivative" in record:
        derivative = complex_from_record(record["derivative"], f"{path}.derivative")
    raw = record.get("components", [])
    try:
        if raw == []:
            zero = SuperSection.zero(curve, bundle_degree)
            return SuperSection(curve, zero.bundle, zero.coefficients, derivative)
        coefficients = _coefficient_rows(raw, f"{path}.components")
        return SuperSection(curve, LineBundleSpec(bundle_degree), coefficients, derivative)
    except InvalidInputError as error:
        if error.location:
            raise
        raise type(error)(str(error), f"{path}.components") from error


def curve_to_record(curve: GlobalCurve, section: Optional[SuperSection] = None) -> Dict[str, Any]:
    record: Dict[str, Any] = {
        "target": curve.target.value,
        "dim": curve.dimension,
        "degree": curve.degree,
        "components": _rows_to_record(curve.coefficients),
    }
    if section is not None:
        record["section"] = {
            "bundle_degree": section.bundle.degree,
            "components": _rows_to_record(section.coefficients) if section.coefficients.size else [],
        }
        if section.derivative_coefficient != 0:
            record["section"]["derivative"] = complex_to_record(section.derivative_coefficient)
    return record


def point_from_record(value: Any, path: str) -> SpherePoint:
    if value == "inf":
        return SpherePoint.infinity()
    chart = _integer(_require(value, "chart", path), f"{path}.chart")
    z = complex_from_record(_require(value, "z", path), f"{path}.z")
    try:
        return SpherePoint(chart, z)
    except InvalidInputError as error:
        raise InvalidInputError(str(error), path) from error


def point_to_record(point: SpherePoint) -> Dict[str, Any]:
    return {"chart": point.chart, "z": complex_to_record(point.z)}


def moebius_from_record(value: Any, path: str) -> MoebiusTransform:
    if not isinstance(value, list) or len(value) != 8:
        raise InvalidInputError("expected the 8 reals of a Moebius transform", path)
    reals = [_real(entry, f"{path}[{index}]") for index, entry in enumerate(value)]
    try:
        return MoebiusTransform.from_reals(reals)
    except InvalidInputError as error:
        raise InvalidInputError(str(error), path) from error


def moebius_to_record(moebius: MoebiusTransform) -> List[float]:
    return list(moebius.to_reals())


def _edge_key(key: str, path: str) -> Tuple[int, int]:
    parts = key.split("-")
    if len(parts) != 2 or not all(part.isdigit() for part in parts):
        raise InvalidInputError(f"nodal keys have the form 'alpha-beta', got {key!r}", path)
    return int(parts[0]), int(parts[1])


def _index_key(key: str, path: str) -> int:
    if not key.isdigit():
        raise InvalidInputError(f"expected a positive integer key, got {key!r}", path)
    return int(key)


def _mapping(value: Any, path: str) -> Dict[str, Any]:
    if not isinstance(value, dict):
        raise InvalidInputError("expected a JSON object", path)
    return value


def _relocated(error: InvalidInputError, path: str) -> InvalidInputError:
    """The same error with its location prefixed by the record path."""
    if not error.location:
        return type(error)(str(error), path)
    message = str(error)[len(error.location) + 2 :]
    return type(error)(message, f"{path}.{error.location}")


def stable_from_record(record: Dict[str, Any], path: str = "$") -> StableSupercurve:
    tree_record = _require(record, "tree", path)
    parents = _require(tree_record, "parents", f"{path}.tree")
    labels = tree_record.get("labels", [])
    if not isinstance(parents, list) or not isinstance(labels, list):
        raise InvalidInputError("parents and labels must be lists", f"{path}.tree")
    try:
        tree = LabelledTree(
            tuple(_integer(value, f"{path}.tree.parents[{index}]") for index, value in enumerate(parents)),
            tuple(_integer(value, f"{path}.tree.labels[{index}]") for index, value in enumerate(labels)),
        )
    except TreeError as error:
        raise _relocated(error, path) from error
    components = {
        _index_key(key, f"{path}.components"): curve_from_record(value, f"{path}.components.{key}")
        for key, value in _mapping(_require(record, "components", path), f"{path}.components").items()
    }
    nodal = {
        _edge_key(key, f"{path}.nodal"): point_from_record(value, f"{path}.nodal.{key}")
        for key, value in _mapping(record.get("nodal", {}), f"{path}.nodal").items()
    }
    marked = {
        _index_key(key, f"{path}.marked"): point_from_record(value, f"{path}.marked.{key}")
        for key, value in _mapping(record.get("marked", {}), f"{path}.marked").items()
    }
    try:
        return StableSupercurve(tree, components, nodal, marked)
    except InvalidInputError as error:
        raise _relocated(error, path) from error


def stable_to_record(x: StableSupercurve) -> Dict[str, Any]:
    return {
        "tree": {"parents": list(x.tree.parents), "labels": list(x.tree.labels)},
        "components": {
            str(alpha): curve_to_record(curve, section) for alpha, (curve, section) in sorted(x.components.items())
        },
        "nodal": {f"{alpha}-{beta}": point_to_record(point) for (alpha, beta), point in sorted(x.nodal.items())},
        "marked": {str(index): point_to_record(point) for index, point in sorted(x.marked.items())},
    }


def witness_from_record(record: Dict[str, Any], path: str) -> Witness:
    tree_map = _require(record, "tree_map", path)
    if not isinstance(tree_map, list):
        raise InvalidInputError("expected a list of vertices", f"{path}.tree_map")
    moebius = {
        _index_key(key, f"{path}.moebius"): moebius_from_record(value, f"{path}.moebius.{key}")
        for key, value in _mapping(_require(record, "moebius", path), f"{path}.moebius").items()
    }
    return tuple(_integer(value, f"{path}.tree_map[{index}]") for index, value in enumerate(tree_map)), moebius


def load_json(path: Path) -> Any:
    try:
        with open(path, encoding="utf-8") as file:
            return json.load(file)
    except json.JSONDecodeError as error:
        raise InvalidInputError(f"invalid JSON: {error.msg} at line {error.lineno}", str(path)) from error


def load_curve(path: Path) -> Member:
    return curve_from_record(load_json(path), path.name)


def load_stable(path: Path) -> StableSupercurve:
    return stable_from_record(load_json(path), path.name)


def load_sequence(directory: Path) -> Tuple[List[StableSupercurve], List[float], Optional[List[Witness]]]:
    """
    Sequence members from the ``*.json`` files of ``directory`` in name order. Each
    file is ``{"nu": float, "stable": {...}, "witness": {...}}``; ``witness`` is
    optional but must then be given for every member.
    """
    files = sorted(directory.glob("*.json"))
    if not files:
        raise InvalidInputError("no *.json sequence members found", str(directory))
    members, nus, witnesses = [], [], []
    for index, file in enumerate(files, start=1):
        record = load_json(file)
        nus.append(_real(record.get("nu", float(index)), f"{file.name}.nu"))
        members.append(stable_from_record(_require(record, "stable", file.name), f"{file.name}.stable"))
        if "witness" in record:
            witnesses.append(witness_from_record(record["witness"], f"{file.name}.witness"))
    if witnesses and len(witnesses) != len(members):
        raise InvalidInputError("either every member or none carries a witness", str(directory))
    return members, nus, witnesses or None


def dump_json(record: Any, stream: IO[str]) -> None:
    json.dump(record, stream, indent=2)
    stream.write("\n")


def format_value(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (complex, np.complexfloating)):
        return f"{format(value.real, '.17g')}{format(value.imag, '+.17g')}j"
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """CSV with every float at 17 significant digits."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
    logger.info(f"wrote {path}")


REGION_FORMS = (
    "sphere",
    "disc:CHART:RE:IM:R",
    "exterior:CHART:RE:IM:R",
    "annulus:CHART:RE:IM:R_INNER:R_OUTER",
)


def parse_region(text: str) -> Region:
    """Region from ``sphere``, ``disc:...``, ``exterior:...`` or ``annulus:...``."""
    kind, *fields = text.strip().split(":")
    try:
        numbers = [float(value) for value in fields]
    except ValueError as error:
        raise InvalidInputError(f"non-numeric field in {text!r}", "region") from error
    if kind == "sphere" and not numbers:
        return Sphere()
    if kind in ("disc", "exterior") and len(numbers) == 4:
        chart, real, imag, radius = numbers
        return Disc(SpherePoint(int(chart), complex(real, imag)), radius, kind == "exterior")
    if kind == "annulus" and len(numbers) == 5:
        chart, real, imag, inner, outer = numbers
        return Annulus(SpherePoint(int(chart), complex(real, imag)), inner, outer)
    raise InvalidInputError(
        f"cannot read {text!r}; expected one of {', '.join(REGION_FORMS)}", "region"
    )
