"""Experiment configuration: grammar, schema and validation.

The grammar is line based (UTF-8)::

    # comment
    kind = twirl-entropy
    seed = 7

    [twirl]
    n_qubits = 1
    layer_counts = 16, 256, 4096

Top-level keys come before the first ``[section]`` header. Values are
scalars or comma-separated lists; ``#`` starts a comment anywhere on a line.
Every problem is collected and reported together.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Any, Callable

from ..channels import DepolarizingChannel, PauliChannel
from ..circuit import AnsatzSpec, NoiseModel, build_ansatz
from ..errors import ConfigErrors, ConfigValidationError, DepolprojError, ParseError
from ..projection import LayerBudget, TwirlExperimentSpec
from ..states import HilbertSpec, PauliString
from ..vqe import Mitigation, OptimizerConfig, TFIMSpec

KINDS = ("twirl-entropy", "vqe-sweep", "vqe-descent", "layer-budget")

_SECTION_RE = re.compile(r"^\[\s*([A-Za-z_][\w-]*)\s*\]$")
_KEY_RE = re.compile(r"^[A-Za-z_][\w-]*$")


def _int(text: str) -> int:
    return int(text, 10)


def _float(text: str) -> float:
    value = float(text)
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError("must be finite")
    return value


def _list(conv: Callable) -> Callable:
    def parse(text: str) -> tuple:
        items = [t.strip() for t in text.split(",")]
        if any(not t for t in items):
            raise ValueError("empty list item")
        return tuple(conv(t) for t in items)

    parse.__name__ = f"list of {conv.__name__.strip('_')}"
    return parse


def _choice(*options: str) -> Callable:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text

    parse.__name__ = "choice"
    return parse


def _str(text: str) -> str:
    return text


_OPTIMIZER = {
    "method": (_choice("spsa", "nelder-mead"), "nelder-mead"),
    "max_iterations": (_int, 500),
    "target_overlap": (_float, 0.99),
    "a": (_float, 0.6),
    "c": (_float, 0.15),
    "A": (_float, 20.0),
    "alpha": (_float, 0.602),
    "gamma": (_float, 0.101),
    "step": (_float, 0.5),
}
_NOISE = {
    "single_qubit": (_str, "none"),
    "cnot": (_str, "none"),
    "layer": (_str, "none"),
}
_VQE_COMMON = {
    "n_qubits": (_int, None),
    "entangler": (_choice("ring", "line"), "ring"),
    "mitigation": (_choice("off", "exact-purity", "tomography"), "exact-purity"),
    "shots": (_int, 0),
}

# kind -> section -> key -> (parser, default); default None means required
SCHEMA: dict[str, dict[str, dict[str, tuple]]] = {
    "twirl-entropy": {
        "twirl": {
            "n_qubits": (_int, None),
            "pauli": (_choice("X", "Y", "Z"), "X"),
            "layer_counts": (_list(_int), None),
            "mode": (_choice("exact", "sampled"), "exact"),
            "trials": (_int, 0),
            "seeds": (_int, 1),
        },
    },
    "vqe-sweep": {
        "vqe": {
            **_VQE_COMMON,
            "sweep": (_choice("coupling", "depth"), None),
            "couplings": (_list(_float), None),
            "depths": (_list(_int), None),
            "seeds": (_int, 1),
        },
        "optimizer": _OPTIMIZER,
        "noise": _NOISE,
    },
    "vqe-descent": {
        "vqe": {
            **_VQE_COMMON,
            "coupling": (_float, None),
            "depth": (_int, None),
            "rescale": (_choice("final", "per-iteration"), "final"),
        },
        "optimizer": _OPTIMIZER,
        "noise": _NOISE,
    },
    "layer-budget": {
        "budget": {
            "delta": (_list(_float), None),
            "epsilon": (_list(_float), None),
            "h_norm": (_list(_float), None),
        },
    },
}

TOP_LEVEL = {
    "kind": (_choice(*KINDS), None),
    "seed": (_int, 0),
    "out": (_str, ""),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration.

    ``params`` maps section name to a dict of typed values with defaults
    filled in. ``out`` is empty when the table goes to standard output.
    """

    kind: str
    seed: int
    params: dict = field(default_factory=dict)
    out: str = ""

    def section(self, name: str) -> dict:
        return self.params.get(name, {})

    def with_overrides(self, seed: int | None = None, out: str | None = None) -> "ExperimentConfig":
        errors = []
        if seed is not None:
            errors.extend(_check_seed("seed", int(seed)))
        if errors:
            raise ConfigErrors(errors)
        return ExperimentConfig(
            self.kind,
            self.seed if seed is None else int(seed),
            self.params,
            self.out if out is None else out,
        )

    def canonical(self) -> str:
        """Normalized text of everything that determines the output rows."""
        body = {"kind": self.kind, "seed": self.seed, "params": self.params}
        return json.dumps(body, sort_keys=True, separators=(",", ":"), default=list)

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def _tokenize(text: str) -> tuple[dict, list]:
    """Split text into ``{section: {key: (value, line, column)}}``."""
    raw: dict[str, dict[str, tuple]] = {"": {}}
    errors: list[DepolprojError] = []
    section = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        stripped = body.strip()
        if not stripped:
            continue
        col = len(body) - len(body.lstrip()) + 1
        if stripped.startswith("["):
            m = _SECTION_RE.match(stripped)
            if not m:
                errors.append(ParseError(f"malformed section header {stripped!r}", lineno, col))
                continue
            section = m.group(1)
            if section in raw:
                errors.append(ParseError(f"section [{section}] repeated", lineno, col))
            raw.setdefault(section, {})
            continue
        if "=" not in stripped:
            errors.append(ParseError("expected 'key = value'", lineno, col))
            continue
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        value = value_part.strip()
        if not _KEY_RE.match(key):
            errors.append(ParseError(f"invalid key {key!r}", lineno, col))
            continue
        if not value:
            vcol = len(key_part) + 2
            errors.append(ParseError(f"missing value for {key!r}", lineno, vcol))
            continue
        if key in raw[section]:
            errors.append(ParseError(f"key {key!r} repeated", lineno, col))
            continue
        vcol = len(key_part) + 1 + (len(value_part) - len(value_part.lstrip())) + 1
        raw[section][key] = (value, lineno, vcol)
    return raw, errors


def _qualified(section: str, key: str) -> str:
    return f"{section}.{key}" if section else key


def _check_seed(name: str, seed: int) -> list:
    if not 0 <= seed < 2**64:
        return [ConfigValidationError(name, f"must fit in 64 unsigned bits, got {seed}")]
    return []


def _convert(section: str, spec: dict, given: dict, errors: list) -> dict:
    out = {}
    for key, (value, line, col) in given.items():
        if key not in spec:
            errors.append(ConfigValidationError(_qualified(section, key), "unknown key"))
            continue
        conv = spec[key][0]
        try:
            out[key] = conv(value)
        except ValueError as exc:
            errors.append(
                ConfigValidationError(
                    _qualified(section, key),
                    f"cannot read {value!r} as {conv.__name__.strip('_')} (line {line}, column {col}): {exc}",
                )
            )
    for key, (_, default) in spec.items():
        if key not in given:
            if default is None:
                errors.append(ConfigValidationError(_qualified(section, key), "required key missing"))
            else:
                out[key] = default
    return out


def parse_channel(text: str, n_qubits: int) -> Any:
    """Read a noise channel description.

    ``none``; ``depolarizing:R``; or comma-separated ``LABEL:P`` Pauli
    faults with ``n_qubits``-letter labels, the identity taking the rest.
    """
    text = text.strip()
    if text == "none":
        return None
    space = HilbertSpec(n_qubits)
    if text.startswith("depolarizing:"):
        return DepolarizingChannel(float(text.split(":", 1)[1]), space)
    probs = {}
    for term in text.split(","):
        label, sep, value = term.strip().partition(":")
        if not sep:
            raise ValueError(f"expected LABEL:P, got {term.strip()!r}")
        p = PauliString(label.strip())
        if p.n_qubits != n_qubits:
            raise ValueError(f"label {label.strip()!r} must have {n_qubits} letters")
        if p.is_identity or p in probs:
            raise ValueError(f"label {label.strip()!r} is the identity or repeated")
        probs[p] = float(value)
    ident = PauliString("I" * n_qubits)
    total = sum(probs.values())
    probs[ident] = 1.0 - total
    return PauliChannel(probs, space)


def build_noise(noise: dict, n_qubits: int, n_layers: int) -> NoiseModel:
    single = parse_channel(noise["single_qubit"], 1)
    cnot = parse_channel(noise["cnot"], 2)
    layer = parse_channel(noise["layer"], n_qubits)
    overrides = {} if layer is None else {i: layer for i in range(n_layers)}
    return NoiseModel(after_single_qubit=single, after_cnot=cnot, layer_overrides=overrides)


def optimizer_config(section: dict, seed: int) -> OptimizerConfig:
    return OptimizerConfig(seed=seed, **section)


def _validate_kind(kind: str, seed: int, params: dict, errors: list) -> None:
    """Build every domain object once so module preconditions run before any work."""

    def attempt(key: str, fn: Callable) -> Any:
        try:
            return fn()
        except KeyError:
            # a required key is missing; already reported
            return None
        except (DepolprojError, ValueError, TypeError) as exc:
            errors.append(ConfigValidationError(key, str(exc)))
            return None

    if kind == "twirl-entropy":
        t = params["twirl"]
        if "seeds" in t:
            if t["seeds"] < 1:
                errors.append(ConfigValidationError("twirl.seeds", "must be >= 1"))
            else:
                errors.extend(_check_seed("twirl.seeds", seed + t["seeds"] - 1))
        attempt(
            "twirl",
            lambda: TwirlExperimentSpec(
                t["n_qubits"], t["layer_counts"], t["pauli"], t["mode"], t["trials"], seed
            ),
        )
        return

    if kind == "layer-budget":
        b = params["budget"]
        for d in b.get("delta", ()):
            attempt("budget.delta", lambda d=d: LayerBudget(d, 1.0, 1.0))
        for e in b.get("epsilon", ()):
            attempt("budget.epsilon", lambda e=e: LayerBudget(0.5, e, 1.0))
        for h in b.get("h_norm", ()):
            attempt("budget.h_norm", lambda h=h: LayerBudget(0.5, 1.0, h))
        return

    v = params["vqe"]
    n = v.get("n_qubits")
    if n is None:
        return
    attempt("vqe.mitigation", lambda: Mitigation(v["mitigation"], v["shots"]))
    attempt("optimizer", lambda: optimizer_config(params["optimizer"], seed))
    if kind == "vqe-sweep":
        if v.get("seeds", 1) < 1:
            errors.append(ConfigValidationError("vqe.seeds", "must be >= 1"))
        else:
            errors.extend(_check_seed("vqe.seeds", seed + v.get("seeds", 1) - 1))
        couplings = v.get("couplings", ())
        depths = v.get("depths", ())
        sweep = v.get("sweep")
        if sweep == "coupling" and len(depths) != 1:
            errors.append(ConfigValidationError("vqe.depths", "a coupling sweep takes exactly one depth"))
        if sweep == "depth" and len(couplings) != 1:
            errors.append(ConfigValidationError("vqe.couplings", "a depth sweep takes exactly one coupling"))
    else:
        couplings = (v.get("coupling"),) if "coupling" in v else ()
        depths = (v.get("depth"),) if "depth" in v else ()
    for x in couplings:
        attempt("vqe.coupling" + ("s" if kind == "vqe-sweep" else ""), lambda x=x: TFIMSpec(n, x))
    key = "vqe.depth" + ("s" if kind == "vqe-sweep" else "")
    for depth in depths:
        circuit = attempt(key, lambda depth=depth: build_ansatz(AnsatzSpec(n, depth, v["entangler"])))
        if circuit is not None:
            attempt("noise", lambda c=circuit: build_noise(params["noise"], n, c.n_layers))


def parse_config(text: str, kind: str | None = None) -> ExperimentConfig:
    """Parse and validate configuration text.

    Parameters
    ----------
    text : str
        Configuration in the grammar described in the module docstring.
    kind : str, optional
        Experiment kind chosen on the command line; the config's ``kind``
        key may be omitted, but if present it must agree.

    Raises
    ------
    ConfigErrors
        Listing every :class:`ParseError` (with line and column) and
        :class:`ConfigValidationError` (naming the key) found.
    """
    raw, errors = _tokenize(text)
    top = dict(raw.pop(""))
    if kind is not None:
        if "kind" in top and top["kind"][0] != kind:
            errors.append(
                ConfigValidationError("kind", f"config is for {top['kind'][0]!r}, not {kind!r}")
            )
        top["kind"] = (kind, 0, 0)
    top_values = _convert("", TOP_LEVEL, top, errors)
    cfg_kind = top_values.get("kind")
    if cfg_kind is None:
        raise ConfigErrors(errors)
    errors.extend(_check_seed("seed", top_values.get("seed", 0)))
    schema = SCHEMA[cfg_kind]
    params = {}
    for section, given in raw.items():
        if section not in schema:
            errors.append(ConfigValidationError(f"[{section}]", f"unknown section for {cfg_kind}"))
    for section, spec in schema.items():
        params[section] = _convert(section, spec, raw.get(section, {}), errors)
    _validate_kind(cfg_kind, top_values.get("seed", 0), params, errors)
    if errors:
        raise ConfigErrors(errors)
    return ExperimentConfig(cfg_kind, top_values["seed"], params, top_values["out"])
