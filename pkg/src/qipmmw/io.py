"""JSON formats for instances, conditioned instances, certificates and reports.

Complex numbers are ``[re, im]`` pairs; a bare number is read as real.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .certificates import DualCertificate, PrimalCertificate
from .conditioning import ConditionedInstance
from .oracle import OracleResult
from .quantum import Gate, MeasurementOperator, PureState, VerifierInstance, build_verifier_instance


class FormatError(ValueError):
    pass


def _complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise FormatError(f"cannot read {v!r} as a complex number")


def decode_vector(data) -> np.ndarray:
    if not isinstance(data, list):
        raise FormatError("vector must be a list")
    return np.array([_complex(v) for v in data], dtype=complex)


def decode_matrix(data) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise FormatError("matrix must be a non-empty list of rows")
    rows = [[_complex(v) for v in r] for r in data]
    if len({len(r) for r in rows}) != 1:
        raise FormatError("matrix rows have different lengths")
    return np.array(rows, dtype=complex)


def encode_vector(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def encode_matrix(m) -> list:
    return [encode_vector(row) for row in np.asarray(m, dtype=complex)]


def matrix_digest(m) -> str:
    return hashlib.sha256(np.ascontiguousarray(np.asarray(m, dtype=complex)).tobytes()).hexdigest()


def dumps(obj: Any) -> str:
    # repr-based float output is the shortest string that round-trips exactly.
    return json.dumps(obj, indent=2, allow_nan=True)


@dataclass
class RawQ:
    """Directly supplied operator with thresholds."""

    q: np.ndarray
    dim_y: int
    dim_x: int
    gamma: float | None
    epsilon: float | None


def _square_dims(side: int) -> tuple[int, int]:
    root = math.isqrt(side)
    if root * root != side:
        raise FormatError(f"cannot split side {side} into equal registers; give dim_y and dim_x")
    return root, root


def parse_instance(data: dict):
    """Return a :class:`VerifierInstance` or a :class:`RawQ` from parsed JSON."""
    if not isinstance(data, dict):
        raise FormatError("instance must be a JSON object")
    if "q" in data:
        q = decode_matrix(data["q"])
        if q.shape[0] != q.shape[1]:
            raise FormatError("q must be square")
        if "dim_y" in data or "dim_x" in data:
            dim_y = int(data.get("dim_y", q.shape[0] // int(data.get("dim_x", 1))))
            dim_x = int(data.get("dim_x", q.shape[0] // dim_y))
            if dim_y * dim_x != q.shape[0]:
                raise FormatError(f"dim_y * dim_x = {dim_y * dim_x} does not match side {q.shape[0]}")
        else:
            dim_y, dim_x = _square_dims(q.shape[0])
        return RawQ(q, dim_y, dim_x, data.get("gamma"), data.get("epsilon"))
    if "psi" in data and "pi" in data:
        psi = decode_vector(data["psi"])
        pi = decode_matrix(data["pi"])
        dim_x = int(data.get("dim_x", 0)) or _square_dims(len(psi))[0]
        dim_z = len(psi) // dim_x
        dim_y = pi.shape[0] // dim_z
        p = int(data.get("p", max(1, math.ceil(math.log2(max(dim_x, dim_y))))))
        return VerifierInstance(PureState(psi, dim_x, dim_z), MeasurementOperator(pi, dim_y, dim_z), p)
    if "p" in data:
        p = int(data["p"])
        if p < 1:
            raise FormatError("p must be positive")

        def gates(key):
            out = []
            for g in data.get(key, []):
                out.append(Gate(tuple(g["targets"]), decode_matrix(g["matrix"])))
            return out

        return build_verifier_instance(gates("u_gates"), gates("v_gates"), p)
    raise FormatError("instance needs either 'q', 'psi' and 'pi', or 'p' with gate lists")


def load_json(path) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc


def encode_conditioned(inst: ConditionedInstance) -> dict:
    return {
        "q": encode_matrix(inst.q.q),
        "dim_y": inst.q.dim_y,
        "dim_x": inst.q.dim_x,
        "gamma": inst.gamma,
        "epsilon": inst.epsilon,
        "k": inst.k,
        "kappa": inst.q.kappa,
        "selected_bin": inst.selected_bin,
        "selected_indices": list(inst.selected_indices),
        "schmidt_coefficients": [float(x) for x in inst.schmidt.coefficients],
        "bin_mass": float(sum(inst.schmidt.coefficients[j] for j in inst.selected_indices)),
        "overlap": inst.overlap,
    }


def encode_certificate(cert, gamma: float, epsilon: float, q_digest: str | None = None) -> dict:
    matrix = cert.x if isinstance(cert, PrimalCertificate) else cert.y
    out = {
        "kind": cert.kind,
        "matrix": encode_matrix(matrix),
        "claimed_trace": cert.claimed_trace,
        "gamma": gamma,
        "epsilon": epsilon,
    }
    if q_digest is not None:
        out["instance_sha256"] = q_digest
    return out


def decode_certificate(data: dict):
    kind = data.get("kind")
    try:
        matrix = decode_matrix(data["matrix"])
        claimed = float(data["claimed_trace"])
    except KeyError as exc:
        raise FormatError(f"certificate is missing {exc}") from exc
    if kind == "primal":
        return PrimalCertificate(matrix, claimed)
    if kind == "dual":
        return DualCertificate(matrix, claimed)
    raise FormatError(f"unknown certificate kind {kind!r}")


def encode_oracle(res: OracleResult, witnesses: bool = True) -> dict:
    out = {
        "lower": res.lower,
        "upper": res.upper,
        "gap": res.gap,
        "converged": res.converged,
        "seed": res.seed,
        "restarts": res.restarts,
        "iterations": res.iterations,
    }
    if witnesses:
        out["choi"] = encode_matrix(res.choi)
        out["dual"] = encode_matrix(res.dual)
    return out
