"""JSON configuration documents and result encoding.

Complex matrices are written as ``{"re": [...], "im": [...]}``; a plain
nested list is read as a real matrix and a string names a standard basis.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InputError, SpecInvalid
from .experiment import ExperimentSpec, Generalized, Projective, SplitChannel, Weak
from .qcore import (
    AmplitudeDamping,
    ChannelFamily,
    DepolarizingFamily,
    IdentityFamily,
    KrausChannel,
    UnitaryFamily,
    named_basis,
)

SCHEMA_VERSIONS = ("1",)

__all__ = [
    "SCHEMA_VERSIONS",
    "load_config",
    "parse_matrix",
    "parse_channel",
    "parse_spec",
    "encode",
    "dumps",
]


def load_config(path):
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("config must be a JSON object")
    version = str(doc.get("schema_version", ""))
    if version not in SCHEMA_VERSIONS:
        raise InputError(f"unsupported schema_version {version!r}; expected one of {SCHEMA_VERSIONS}")
    return doc


def parse_matrix(obj, dim=None):
    if isinstance(obj, str):
        if dim is None:
            raise InputError(f"basis name {obj!r} needs the experiment dimension")
        return named_basis(obj, dim)
    if isinstance(obj, dict):
        if "re" not in obj:
            raise InputError("complex matrix needs an 're' part")
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise InputError("'re' and 'im' parts differ in shape")
        return re + 1j * im
    try:
        return np.asarray(obj, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InputError(f"cannot read matrix from {obj!r}") from exc


def parse_channel(obj, dim):
    """A channel family (``amplitude_damping``, ``identity``, ``depolarizing``,
    ``unitary``) or an ``explicit`` list of operators (a fixed channel)."""
    if not isinstance(obj, dict) or len(obj) != 1:
        raise InputError("channel must be an object with exactly one key")
    (name, args), = obj.items()
    args = args or {}
    try:
        if name == "amplitude_damping":
            return AmplitudeDamping(float(args["gamma"]))
        if name == "identity":
            return IdentityFamily(dim)
        if name == "depolarizing":
            return DepolarizingFamily(dim, float(args["p"]))
        if name == "unitary":
            return UnitaryFamily(parse_matrix(args["hamiltonian"]))
        if name == "explicit":
            ops = np.stack([parse_matrix(m) for m in args["operators"]])
            return KrausChannel(ops)
    except KeyError as exc:
        raise InputError(f"channel {name!r} is missing parameter {exc}") from exc
    raise InputError(f"unknown channel {name!r}")


def _parse_measurement(obj, dim, nodes):
    kind = obj.get("type", "projective")
    if kind == "generalized":
        ops = np.stack([parse_matrix(m) for m in obj["operators"]])
        return Generalized(ops, obj["outcomes"], obj.get("weights"))
    basis = parse_matrix(obj.get("basis", "z"), dim)
    ev = obj.get("eigenvalues", list(range(dim)))
    if kind == "projective":
        return Projective(basis, ev)
    if kind == "weak":
        if "delta" not in obj:
            raise InputError("weak measurement needs 'delta'")
        return Weak(basis, ev, float(obj["delta"]))
    raise InputError(f"unknown measurement type {kind!r}")


def parse_spec(doc, *, tau=None, nodes=None):
    """Build an :class:`ExperimentSpec` from the ``experiment`` block."""
    exp = doc.get("experiment")
    if not isinstance(exp, dict):
        raise InputError("config has no 'experiment' block")
    try:
        dim = int(exp["dim"])
        b0 = parse_matrix(exp["basis0"], dim)
        b1 = parse_matrix(exp["basis1"], dim)
        family = parse_channel(exp["channel"], dim)
        alpha_t, beta_t = exp["alpha_tilde"], exp["beta_tilde"]
    except KeyError as exc:
        raise InputError(f"experiment block is missing {exc}") from exc

    split = exp.get("split")
    if split is not None:
        pre = parse_channel(split["pre"], dim) if "pre" in split else family
        post = parse_channel(split["post"], dim) if "post" in split else family
        meas = split.get("measurement")
        meas = None if meas is None else _parse_measurement(meas, dim, nodes)
        t = split.get("tau") if tau is None else tau
        if t is None:
            raise InputError("split needs 'tau'")
        channel = SplitChannel(pre, post, float(t), meas, split.get("tau_end"))
    elif isinstance(family, ChannelFamily):
        channel = family(0.0, 1.0)
    else:
        channel = family

    if "alpha" in exp:
        return ExperimentSpec(b0, b1, exp["alpha"], channel, alpha_t, beta_t)
    if "rho_pre" in exp:
        return ExperimentSpec.from_pre_measurement_state(parse_matrix(exp["rho_pre"]), b0, b1, channel,
                                                         alpha_t, beta_t)
    raise SpecInvalid("experiment needs 'alpha' or 'rho_pre'")


def encode(obj):
    """Turn results into JSON-ready data; complex arrays become re/im pairs."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else str(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(doc):
    return json.dumps(encode(doc), indent=2, sort_keys=True) + "\n"
