"""Reading point files and model descriptions.

Point files are comma-separated numeric rows, one point per row, with an
optional header line. The path ``-`` reads stdin. Model files are JSON objects
with ``"schema": 1`` and a ``family`` key.
"""

from __future__ import annotations

import csv
import json
import sys
from typing import Iterator, Optional, TextIO

import numpy as np

from .models import (
    DistributionModel,
    EllipticalAffine,
    GaussianStd,
    PSymmetric,
    StudentT,
    UniformBall,
    UniformSphere,
    gaussian_marginal,
    student_t_marginal,
)

SCHEMA = 1


class InputError(ValueError):
    """Malformed input file or model description."""


def _open(path: str) -> TextIO:
    if path == "-":
        return sys.stdin
    try:
        return open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc.strerror}") from exc


def iter_points(path: str, header: bool = False, d: Optional[int] = None) -> Iterator[np.ndarray]:
    """Yield the rows of a point file one at a time.

    Blank lines are skipped. Every row must have the same number of columns,
    equal to ``d`` when given.
    """
    fh = _open(path)
    try:
        reader = csv.reader(fh)
        width = d
        for lineno, row in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = np.array([float(c) for c in row], dtype=float)
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: non-numeric value") from exc
            if not np.all(np.isfinite(vals)):
                raise InputError(f"{path}:{lineno}: non-finite value")
            if width is None:
                width = vals.size
            elif vals.size != width:
                raise InputError(f"{path}:{lineno}: expected {width} columns, got {vals.size}")
            yield vals
    finally:
        if fh is not sys.stdin:
            fh.close()


def read_points(path: str, header: bool = False, d: Optional[int] = None) -> np.ndarray:
    rows = list(iter_points(path, header, d))
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.vstack(rows)


def _need(obj: dict, key: str):
    if key not in obj:
        raise InputError(f"model is missing '{key}'")
    return obj[key]


def _dim(obj: dict) -> int:
    d = _need(obj, "d")
    if not isinstance(d, int) or isinstance(d, bool) or d < 2:
        raise InputError("'d' must be an integer >= 2")
    return d


def _marginal(spec):
    if isinstance(spec, str):
        spec = {"family": spec}
    fam = spec.get("family")
    if fam == "gaussian":
        return gaussian_marginal()
    if fam == "cauchy":
        return student_t_marginal(1)
    if fam == "student_t":
        return student_t_marginal(int(_need(spec, "nu")))
    raise InputError(f"unknown marginal family {fam!r}")


def model_from_dict(obj: dict, top: bool = True) -> DistributionModel:
    """Build a model from its JSON description.

    >>> model_from_dict({"schema": 1, "family": "gaussian", "d": 2})
    GaussianStd(d=2)
    """
    if not isinstance(obj, dict):
        raise InputError("a model must be a JSON object")
    if top and obj.get("schema") != SCHEMA:
        raise InputError(f"unsupported model schema {obj.get('schema')!r}, expected {SCHEMA}")
    fam = _need(obj, "family")
    try:
        if fam == "gaussian":
            return GaussianStd(_dim(obj))
        if fam == "student_t":
            return StudentT(_dim(obj), int(_need(obj, "nu")))
        if fam == "cauchy":
            return StudentT(_dim(obj), 1)
        if fam == "uniform_ball":
            return UniformBall(_dim(obj))
        if fam == "uniform_sphere":
            return UniformSphere(_dim(obj))
        if fam == "p_symmetric":
            return PSymmetric(_dim(obj), float(_need(obj, "p")), _marginal(obj.get("marginal", "gaussian")))
        if fam == "elliptical":
            base = model_from_dict(_need(obj, "base"), top=False)
            return EllipticalAffine(base, np.asarray(_need(obj, "mu"), float), np.asarray(_need(obj, "sigma"), float))
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid {fam} model: {exc}") from exc
    raise InputError(f"unknown model family {fam!r}")


def model_to_dict(model: DistributionModel, top: bool = True) -> dict:
    if isinstance(model, EllipticalAffine):
        out = {
            "family": "elliptical",
            "base": model_to_dict(model.base, top=False),
            "mu": model.mu.tolist(),
            "sigma": model.sigma.tolist(),
        }
    elif isinstance(model, GaussianStd):
        out = {"family": "gaussian", "d": model.d}
    elif isinstance(model, StudentT):
        out = {"family": "student_t", "d": model.d, "nu": model.nu}
    elif isinstance(model, UniformBall):
        out = {"family": "uniform_ball", "d": model.d}
    elif isinstance(model, UniformSphere):
        out = {"family": "uniform_sphere", "d": model.d}
    elif isinstance(model, PSymmetric):
        marg = {"family": model.marginal.family, **model.marginal.params}
        out = {"family": "p_symmetric", "d": model.d, "p": model.p, "marginal": marg}
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return {"schema": SCHEMA, **out} if top else out


def read_model(path: str) -> DistributionModel:
    fh = _open(path)
    try:
        obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg})") from exc
    finally:
        if fh is not sys.stdin:
            fh.close()
    return model_from_dict(obj)


__all__ = ["InputError", "iter_points", "model_from_dict", "model_to_dict", "read_model", "read_points"]
