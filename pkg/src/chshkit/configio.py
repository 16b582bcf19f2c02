"""Loading and saving strategy configurations and process-tool inputs.

Configs are JSON objects with an explicit ``kind`` tag.  Complex entries are
written as two-element ``[real, imag]`` arrays so no special literal syntax
is assumed; plain numbers are accepted on input as purely real entries.

Structural problems (bad JSON, missing or mistyped fields) raise
:class:`ConfigError`; values that parse but violate a strategy invariant
surface as the underlying ``ValueError``.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .game import Deterministic, ExplicitBox, NSBox, SharedRandomness, Strategy
from .tsirelson import QuantumSetup


class ConfigError(Exception):
    """Malformed configuration: parse or structure problems."""


def _require(raw: dict, field: str, where: str) -> Any:
    if field not in raw:
        raise ConfigError(f"{where}: missing field '{field}'")
    return raw[field]


def _bit_pair(value: Any, where: str) -> tuple[int, int]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{where}: expected a list of two bits, got {value!r}")
    out = []
    for entry in value:
        if not isinstance(entry, int) or isinstance(entry, bool):
            raise ConfigError(f"{where}: bits must be integers, got {entry!r}")
        out.append(entry)
    return out[0], out[1]


def _number(value: Any, where: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _complex_entry(value: Any, where: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(_number(value[0], where), _number(value[1], where))
    raise ConfigError(f"{where}: expected a number or [real, imag] pair, got {value!r}")


def _complex_vector(value: Any, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}: expected a non-empty list")
    return np.array([_complex_entry(v, f"{where}[{i}]") for i, v in enumerate(value)])


def _complex_matrix(value: Any, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}: expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or not row:
            raise ConfigError(f"{where}[{i}]: expected a non-empty row")
        rows.append([_complex_entry(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ConfigError(f"{where}: ragged rows")
    return np.array(rows)


def _real_matrix(value: Any, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}: expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or not row:
            raise ConfigError(f"{where}[{i}]: expected a non-empty row")
        rows.append([_number(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ConfigError(f"{where}: ragged rows")
    return np.array(rows)


def _load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return raw


def _deterministic_from(raw: dict, where: str) -> Deterministic:
    return Deterministic(
        q_of_x=_bit_pair(_require(raw, "q_of_x", where), f"{where}.q_of_x"),
        r_of_y=_bit_pair(_require(raw, "r_of_y", where), f"{where}.r_of_y"),
    )


def load_strategy(path) -> Strategy:
    """Load a strategy config; see the package README for the schema."""
    raw = _load_json(path)
    where = str(path)
    kind = _require(raw, "kind", where)
    if kind == "deterministic":
        return _deterministic_from(raw, where)
    if kind == "mixture":
        components = _require(raw, "components", where)
        if not isinstance(components, list) or not components:
            raise ConfigError(f"{where}.components: expected a non-empty list")
        mixture = []
        for i, comp in enumerate(components):
            if not isinstance(comp, dict):
                raise ConfigError(f"{where}.components[{i}]: expected an object")
            weight = _number(_require(comp, "weight", f"{where}.components[{i}]"),
                             f"{where}.components[{i}].weight")
            mixture.append((weight, _deterministic_from(comp, f"{where}.components[{i}]")))
        return SharedRandomness(tuple(mixture))
    if kind == "ns_box":
        return NSBox(_number(_require(raw, "e", where), f"{where}.e"))
    if kind == "box":
        table = _require(raw, "table", where)
        if not isinstance(table, list):
            raise ConfigError(f"{where}.table: expected a nested list P[q][r][x][y]")
        try:
            entries = np.asarray(table, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}.table: not a rectangular numeric table: {exc}") from exc
        return ExplicitBox(entries)
    if kind == "quantum":
        dims = _require(raw, "dims", where)
        if not isinstance(dims, list) or len(dims) != 2:
            raise ConfigError(f"{where}.dims: expected [dim_a, dim_b]")
        state = _complex_vector(_require(raw, "state", where), f"{where}.state")
        mats = {
            name: _complex_matrix(_require(raw, name, where), f"{where}.{name}")
            for name in ("a0", "a1", "b0", "b1")
        }
        kwargs = {}
        for field in ("alice_outcome", "bob_outcome"):
            if field in raw:
                if not isinstance(raw[field], list):
                    raise ConfigError(f"{where}.{field}: expected a list of bits")
                kwargs[field] = tuple(raw[field])
        setup = QuantumSetup(state=state, **mats, **kwargs)
        if [setup.dim_a, setup.dim_b] != [int(d) for d in dims]:
            raise ConfigError(
                f"{where}.dims: declared {dims!r} but matrices have dims "
                f"({setup.dim_a}, {setup.dim_b})"
            )
        return setup
    raise ConfigError(
        f"{where}: unknown kind {kind!r}; expected deterministic, mixture, ns_box, box or quantum"
    )


def complex_matrix_payload(m: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m, dtype=complex)]


def complex_vector_payload(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def real_matrix_payload(m: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.asarray(m, dtype=float)]


def strategy_config(strategy: Strategy) -> dict:
    """Serialize a strategy to the JSON-ready config dict ``load_strategy`` accepts."""
    if isinstance(strategy, Deterministic):
        return {"kind": "deterministic", "q_of_x": list(strategy.q_of_x), "r_of_y": list(strategy.r_of_y)}
    if isinstance(strategy, SharedRandomness):
        return {
            "kind": "mixture",
            "components": [
                {"weight": w, "q_of_x": list(d.q_of_x), "r_of_y": list(d.r_of_y)}
                for w, d in strategy.mixture
            ],
        }
    if isinstance(strategy, NSBox):
        return {"kind": "ns_box", "e": strategy.e}
    if isinstance(strategy, ExplicitBox):
        return {"kind": "box", "table": strategy.table.tolist()}
    if isinstance(strategy, QuantumSetup):
        return {
            "kind": "quantum",
            "dims": [strategy.dim_a, strategy.dim_b],
            "state": complex_vector_payload(strategy.state),
            "a0": complex_matrix_payload(strategy.a0),
            "a1": complex_matrix_payload(strategy.a1),
            "b0": complex_matrix_payload(strategy.b0),
            "b1": complex_matrix_payload(strategy.b1),
            "alice_outcome": list(strategy.alice_outcome),
            "bob_outcome": list(strategy.bob_outcome),
        }
    raise TypeError(f"not a strategy: {strategy!r}")


def save_strategy(strategy: Strategy, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(strategy_config(strategy), fh, indent=2)
        fh.write("\n")


def load_process_input(path, fields: dict[str, str]) -> dict[str, np.ndarray]:
    """Load named matrices for the process tools.

    ``fields`` maps field name to ``"real"`` or ``"complex"``.
    """
    raw = _load_json(path)
    where = str(path)
    out = {}
    for name, kind in fields.items():
        value = _require(raw, name, where)
        if kind == "real":
            out[name] = _real_matrix(value, f"{where}.{name}")
        else:
            out[name] = _complex_matrix(value, f"{where}.{name}")
    return out
