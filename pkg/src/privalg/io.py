"""JSON encodings for matrices, algebras, channels, descriptors and reports.

Complex matrices are nested lists of ``[re, im]`` pairs.  Channel files are
``{"kind": "kraus"|"choi"|"action", "domain": algebra|"full",
"codomain_dim": d, "data": ...}``; for ``"action"`` the data is a list of
``[X, E(X)]`` pairs whose first entries span the domain.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import VNAlgebra, full_algebra, generate
from .channel import Channel, from_choi, from_kraus
from .numerics import Tolerances
from .symplectic import GaussianCharFn, WeylChannelDescriptor


class SchemaError(ValueError):
    """Input JSON does not follow the expected schema."""


def _clean(x: float) -> float:
    # fixed precision keeps reports byte-identical across runs
    v = float(f"{x:.12g}")
    return 0.0 if v == 0.0 else v


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[_clean(z.real), _clean(z.imag)] for z in row] for row in m]


def decode_matrix(obj: Any, where: str = "matrix") -> np.ndarray:
    """Accepts ``[re, im]`` pairs or plain real entries."""
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SchemaError(f"{where}: expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(obj):
        out = []
        for j, entry in enumerate(row):
            if isinstance(entry, (int, float)):
                out.append(complex(entry))
            elif isinstance(entry, list) and len(entry) == 2 and all(isinstance(t, (int, float)) for t in entry):
                out.append(complex(entry[0], entry[1]))
            else:
                raise SchemaError(f"{where}[{i}][{j}]: expected a number or a [re, im] pair")
        rows.append(out)
    if len({len(r) for r in rows}) != 1:
        raise SchemaError(f"{where}: rows have different lengths")
    return np.array(rows, dtype=complex)


def decode_real_matrix(obj: Any, where: str) -> np.ndarray:
    m = decode_matrix(obj, where)
    if np.abs(m.imag).max() > 0:
        raise SchemaError(f"{where}: expected a real matrix")
    return m.real


def _field(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in obj:
        raise SchemaError(f"{where}: missing field '{key}'")
    return obj[key]


def encode_algebra(a: VNAlgebra) -> dict:
    return {"ambient_dim": a.ambient_dim, "unit": encode_matrix(a.unit),
            "generators": [encode_matrix(b) for b in a.basis]}


def decode_algebra(obj: Any, tol: Tolerances | None = None, where: str = "algebra") -> VNAlgebra:
    d = _field(obj, "ambient_dim", where)
    if not isinstance(d, int) or d < 1:
        raise SchemaError(f"{where}.ambient_dim: expected a positive integer")
    gens = _field(obj, "generators", where)
    if not isinstance(gens, list):
        raise SchemaError(f"{where}.generators: expected a list")
    mats = [decode_matrix(g, f"{where}.generators[{i}]") for i, g in enumerate(gens)]
    unit = decode_matrix(obj["unit"], f"{where}.unit") if "unit" in obj else None
    return generate(mats, d, unit, tol)


def encode_channel(e: Channel) -> dict:
    dom: Any = "full" if e.is_full_domain else encode_algebra(e.domain)
    return {"kind": "action", "domain": dom, "codomain_dim": e.codomain_dim,
            "codomain_unit": encode_matrix(e.codomain_unit),
            "data": [[encode_matrix(b), encode_matrix(eb)] for b, eb in zip(e.domain.basis, e.action)]}


def decode_channel(obj: Any, tol: Tolerances | None = None, where: str = "channel") -> Channel:
    kind = _field(obj, "kind", where)
    data = _field(obj, "data", where)
    dom_obj = obj.get("domain", "full")
    if kind == "kraus":
        if not isinstance(data, list) or not data:
            raise SchemaError(f"{where}.data: expected a non-empty list of Kraus matrices")
        ks = [decode_matrix(k, f"{where}.data[{i}]") for i, k in enumerate(data)]
        return from_kraus(ks, tol=tol)
    if kind == "choi":
        j = decode_matrix(data, f"{where}.data")
        d = _field(obj, "codomain_dim", where)
        if not isinstance(d, int) or d < 1 or j.shape[0] % d:
            raise SchemaError(f"{where}.codomain_dim: does not divide the Choi size")
        return from_choi(j, (d, j.shape[0] // d), tol)
    if kind == "action":
        if not isinstance(data, list) or not data:
            raise SchemaError(f"{where}.data: expected a list of [X, E(X)] pairs")
        xs, ys = [], []
        for i, pair in enumerate(data):
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError(f"{where}.data[{i}]: expected an [X, E(X)] pair")
            xs.append(decode_matrix(pair[0], f"{where}.data[{i}][0]"))
            ys.append(decode_matrix(pair[1], f"{where}.data[{i}][1]"))
        dp = xs[0].shape[0]
        domain = full_algebra(dp) if dom_obj == "full" else decode_algebra(dom_obj, tol, f"{where}.domain")
        xs_a, ys_a = np.array(xs), np.array(ys)
        # coeffs[k, n] = <B_k, X_n>; sol[n, k] is the weight of X_n in B_k
        coeffs = np.einsum("kij,nij->kn", domain.basis.conj(), xs_a)
        sol, *_ = np.linalg.lstsq(coeffs, np.eye(domain.dim, dtype=complex), rcond=None)
        recon = np.einsum("nk,nij->kij", sol, xs_a)
        if np.abs(recon - domain.basis).max() > 1e-8:
            raise SchemaError(f"{where}.data: the inputs X do not span the domain")
        action = np.einsum("nk,nij->kij", sol, ys_a)
        unit = decode_matrix(obj["codomain_unit"], f"{where}.codomain_unit") if "codomain_unit" in obj else None
        return Channel(domain, action, codomain_unit=unit, tol=tol)
    raise SchemaError(f"{where}.kind: expected 'kraus', 'choi' or 'action', got {kind!r}")


def encode_descriptor(desc: WeylChannelDescriptor) -> dict:
    return {"n": desc.n, "K": desc.K.tolist(), "K_E": desc.K_E.tolist(),
            "env": {"m": desc.env.m.tolist(), "alpha": desc.env.alpha.tolist()}}


def decode_descriptor(obj: Any, where: str = "descriptor") -> WeylChannelDescriptor:
    n = _field(obj, "n", where)
    k = decode_real_matrix(_field(obj, "K", where), f"{where}.K")
    ke = decode_real_matrix(_field(obj, "K_E", where), f"{where}.K_E")
    env = _field(obj, "env", where)
    alpha = decode_real_matrix(_field(env, "alpha", f"{where}.env"), f"{where}.env.alpha")
    m = env.get("m")
    if k.shape != (2 * n, 2 * n):
        raise SchemaError(f"{where}.K: expected a {2 * n}x{2 * n} matrix")
    return WeylChannelDescriptor(k, ke, GaussianCharFn(None if m is None else np.asarray(m, float), alpha))


def load_json(path: str | Path, what: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"{what}: cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{what}: malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def dump_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
