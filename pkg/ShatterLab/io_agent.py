"""Matrix files, CSV/JSON artifacts and run manifests.

Every writer goes through a temp file in the target directory followed by
``os.replace``, so readers never see a half-written output.
"""
from __future__ import annotations

import contextlib
import enum
import hashlib
import json
import logging
import math
import os
import platform
import re
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
import scipy
import scipy.sparse

from . import __version__
from .diagnostic_agent import PseudospectrumGrid, SpectralReport
from .errors import InputError
from .matrix_agent import as_sparse
from .noise_agent import PRNG_CONTRACT

logger = logging.getLogger(__name__)

MATRIX_MARKET_BANNER = "%%MatrixMarket"
MANIFEST_SUFFIX = ".manifest.json"
_TOKEN = re.compile(r"\S+")


def schema_tag(kind: str) -> str:
    return f"shatterlab/{kind}/v1"


# =============================================================================
# atomic writes and JSON
# =============================================================================

@contextlib.contextmanager
def atomic_path(path: str) -> Iterator[str]:
    """Yield a temp path next to ``path``; it replaces ``path`` only if the block succeeds."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=os.path.basename(path), dir=directory)
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def sanitize(value: Any) -> Any:
    """JSON-ready copy: numpy to Python, complex to [re, im], non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(key): sanitize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize(item) for item in value]
    if isinstance(value, np.ndarray):
        return [sanitize(item) for item in value.tolist()]
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [sanitize(float(value.real)), sanitize(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def canonical_json(value: Any) -> str:
    return json.dumps(sanitize(value), sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_digest(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def environment_stamp() -> Dict[str, str]:
    return {
        "shatterlab": __version__,
        "prng": PRNG_CONTRACT,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "platform": platform.platform(),
    }


# =============================================================================
# manifests
# =============================================================================

@dataclass(frozen=True)
class RunManifest:
    command: str
    config_digest: str
    seed: int
    tool_version: str
    timestamp: str
    config: Dict[str, Any] = field(default_factory=dict)
    outputs: Tuple[str, ...] = ()

    @classmethod
    def create(cls, command: str, config: dict, outputs=(), seed: Optional[int] = None) -> "RunManifest":
        if seed is None:
            seed = config.get("seed", 0) or 0
        return cls(
            command=command,
            config_digest=config_digest(config),
            seed=int(seed),
            tool_version=__version__,
            timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            config=dict(config),
            outputs=tuple(os.path.basename(path) for path in outputs),
        )

    def to_dict(self) -> dict:
        return {
            "schema": schema_tag("manifest"),
            "command": self.command,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
            "config": self.config,
            "outputs": list(self.outputs),
        }


# =============================================================================
# agent
# =============================================================================

class IO_Agent:
    @staticmethod
    def dumps(payload: dict) -> str:
        return json.dumps(sanitize(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @staticmethod
    def write_json(path: str, payload: dict) -> str:
        text = IO_Agent.dumps(payload)
        with atomic_path(path) as tmp:
            with open(tmp, "w", encoding="utf-8") as f:
                f.write(text)
        return path

    @staticmethod
    def read_json(path: str) -> Any:
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            raise InputError(f"Cannot read {path}: {exc.strerror}") from exc
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"Malformed JSON in {path}: {exc.msg}", line=exc.lineno, column=exc.colno) from exc

    @staticmethod
    def write_csv(path: str, frame: pd.DataFrame) -> str:
        with atomic_path(path) as tmp:
            frame.to_csv(tmp, index=False)
        return path

    @staticmethod
    def read_csv(path: str) -> pd.DataFrame:
        try:
            return pd.read_csv(path, float_precision="round_trip")
        except OSError as exc:
            raise InputError(f"Cannot read {path}: {exc}") from exc

    @staticmethod
    def write_manifest(output_path: str, command: str, config: dict, outputs=(), seed: Optional[int] = None) -> str:
        manifest = RunManifest.create(command, config, outputs or (output_path,), seed)
        return IO_Agent.write_json(output_path + MANIFEST_SUFFIX, manifest.to_dict())

    @staticmethod
    def read_manifest(path: str) -> RunManifest:
        payload = IO_Agent.read_json(path)
        if not isinstance(payload, dict) or payload.get("schema") != schema_tag("manifest"):
            raise InputError(f"{path} is not a run manifest.", pointer="/schema")
        try:
            manifest = RunManifest(
                command=payload["command"],
                config_digest=payload["config_digest"],
                seed=int(payload["seed"]),
                tool_version=payload["tool_version"],
                timestamp=payload["timestamp"],
                config=payload["config"],
                outputs=tuple(payload.get("outputs", ())),
            )
        except KeyError as exc:
            raise InputError(f"Manifest {path} lacks a field.", pointer=f"/{exc.args[0]}") from exc
        if config_digest(manifest.config) != manifest.config_digest:
            raise InputError(f"Manifest {path}: config does not match its digest.", pointer="/config_digest")
        return manifest

    # -------------------------------------------------------------------------
    # Matrix Market
    # -------------------------------------------------------------------------

    @staticmethod
    def read_matrix(path: str) -> scipy.sparse.csr_matrix:
        """Read a square Matrix Market file (coordinate or array; real, integer or complex; general)."""
        try:
            with open(path, "r", encoding="utf-8") as f:
                lines = f.read().splitlines()
        except OSError as exc:
            raise InputError(f"Cannot read matrix file {path}: {exc.strerror}") from exc
        return _parse_matrix_market(lines, path)

    @staticmethod
    def write_matrix(path: str, A, layout: str = "coordinate") -> str:
        if layout == "coordinate":
            S = as_sparse(A).tocoo()
            n = S.shape[0]
            order = np.lexsort((S.col, S.row))
            lines = [f"{MATRIX_MARKET_BANNER} matrix coordinate complex general", f"{n} {n} {S.nnz}"]
            for k in order:
                value = complex(S.data[k])
                lines.append(f"{S.row[k] + 1} {S.col[k] + 1} {value.real!r} {value.imag!r}")
        elif layout == "array":
            D = as_sparse(A).toarray()
            n = D.shape[0]
            lines = [f"{MATRIX_MARKET_BANNER} matrix array complex general", f"{n} {n}"]
            for value in D.ravel(order="F"):
                lines.append(f"{float(value.real)!r} {float(value.imag)!r}")
        else:
            raise InputError(f"Unknown matrix layout {layout!r}; expected 'coordinate' or 'array'.")
        with atomic_path(path) as tmp:
            with open(tmp, "w", encoding="utf-8", newline="\n") as f:
                f.write("\n".join(lines) + "\n")
        return path

    @staticmethod
    def report_to_frame(report: SpectralReport) -> pd.DataFrame:
        """One row per eigenvalue; matrix-level fields repeat on every row."""
        frame = pd.DataFrame({
            "eig_re": report.eigenvalues.real,
            "eig_im": report.eigenvalues.imag,
            "kappa_j": report.kappa_j,
        })
        summary = report.to_dict()
        for key in ("kappa_v_lower", "kappa_v_upper", "kappa_v_direct", "eta", "sigma_n", "sigma_n_minus_1", "defective"):
            frame[key] = summary[key]
        return frame

    # -------------------------------------------------------------------------
    # pseudospectrum grids
    # -------------------------------------------------------------------------

    @staticmethod
    def grid_to_frame(grid: PseudospectrumGrid) -> pd.DataFrame:
        nodes = grid.nodes()
        return pd.DataFrame({
            "re": nodes.real.ravel(),
            "im": nodes.imag.ravel(),
            "sigma_min": grid.sigma_min_field.ravel(),
        })

    @staticmethod
    def grid_from_frame(frame: pd.DataFrame, eps_levels=()) -> PseudospectrumGrid:
        missing = {"re", "im", "sigma_min"} - set(frame.columns)
        if missing:
            raise InputError(f"Grid CSV lacks columns {sorted(missing)}.")
        resolution = int(round(math.sqrt(len(frame))))
        if resolution * resolution != len(frame) or resolution < 2:
            raise InputError(f"Grid CSV has {len(frame)} rows, not a square number >= 4.")
        re_axis = frame["re"].to_numpy()[:resolution]
        im_axis = frame["im"].to_numpy()[::resolution]
        center = complex((re_axis[0] + re_axis[-1]) / 2, (im_axis[0] + im_axis[-1]) / 2)
        radius = float((re_axis[-1] - re_axis[0]) / 2)
        field_values = frame["sigma_min"].to_numpy(dtype=float).reshape(resolution, resolution)
        return PseudospectrumGrid(center, radius, resolution, field_values, tuple(eps_levels))

    @staticmethod
    def grid_to_dict(grid: PseudospectrumGrid) -> dict:
        return {
            "schema": schema_tag("pseudospectrum"),
            "center": [grid.center.real, grid.center.imag],
            "radius": grid.radius,
            "resolution": grid.resolution,
            "eps_levels": list(grid.eps_levels),
            "sigma_min_field": grid.sigma_min_field.ravel().tolist(),
        }

    @staticmethod
    def grid_from_dict(payload: dict) -> PseudospectrumGrid:
        if payload.get("schema") != schema_tag("pseudospectrum"):
            raise InputError("Not a pseudospectrum grid document.", pointer="/schema")
        resolution = int(payload["resolution"])
        field_values = np.asarray(payload["sigma_min_field"], dtype=float)
        if field_values.size != resolution * resolution:
            raise InputError(f"Field holds {field_values.size} values, expected {resolution ** 2}.", pointer="/sigma_min_field")
        return PseudospectrumGrid(
            center=complex(*payload["center"]),
            radius=float(payload["radius"]),
            resolution=resolution,
            sigma_min_field=field_values.reshape(resolution, resolution),
            eps_levels=tuple(float(eps) for eps in payload.get("eps_levels", ())),
        )


# =============================================================================
# Matrix Market parsing
# =============================================================================

def _tokens(line: str) -> List[Tuple[str, int]]:
    return [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(line)]


def _number(token: str, line_number: int, column: int, path: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise InputError(f"{path}: expected a number, got {token!r}", line=line_number, column=column) from None
    if not math.isfinite(value):
        raise InputError(f"{path}: non-finite entry {token!r}", line=line_number, column=column)
    return value


def _index(token: str, n: int, line_number: int, column: int, path: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise InputError(f"{path}: expected an index, got {token!r}", line=line_number, column=column) from None
    if not (1 <= value <= n):
        raise InputError(f"{path}: index {value} outside 1..{n}", line=line_number, column=column)
    return value - 1


def _parse_matrix_market(lines: List[str], path: str) -> scipy.sparse.csr_matrix:
    if not lines or not lines[0].startswith(MATRIX_MARKET_BANNER):
        raise InputError(f"{path}: missing {MATRIX_MARKET_BANNER} header", line=1, column=1)
    header = _tokens(lines[0].lower())
    if len(header) != 5 or header[1][0] != "matrix":
        raise InputError(f"{path}: header must read '{MATRIX_MARKET_BANNER} matrix <layout> <field> general'", line=1, column=1)
    (layout, layout_col), (field_kind, field_col), (symmetry, symmetry_col) = header[2], header[3], header[4]
    if layout not in ("coordinate", "array"):
        raise InputError(f"{path}: unsupported layout {layout!r}", line=1, column=layout_col)
    if field_kind not in ("real", "integer", "complex"):
        raise InputError(f"{path}: unsupported field {field_kind!r}", line=1, column=field_col)
    if symmetry != "general":
        raise InputError(f"{path}: only 'general' symmetry is supported, got {symmetry!r}", line=1, column=symmetry_col)
    width = 2 if field_kind == "complex" else 1

    body = [(number, line) for number, line in enumerate(lines[1:], start=2) if line.strip() and not line.lstrip().startswith("%")]
    if not body:
        raise InputError(f"{path}: missing size line", line=len(lines) + 1, column=1)
    size_line, size_text = body[0]
    size = _tokens(size_text)
    expected = 3 if layout == "coordinate" else 2
    if len(size) != expected:
        raise InputError(f"{path}: size line needs {expected} integers", line=size_line, column=1)
    try:
        dims = [int(token) for token, _ in size]
    except ValueError:
        raise InputError(f"{path}: size line needs integers", line=size_line, column=1) from None
    rows, cols = dims[0], dims[1]
    if rows != cols or rows < 1:
        raise InputError(f"{path}: expected a nonempty square matrix, got {rows}x{cols}", line=size_line, column=1)
    n = rows
    entries = body[1:]

    if layout == "coordinate":
        nnz = dims[2]
        if len(entries) != nnz:
            where = entries[nnz][0] if len(entries) > nnz else len(lines) + 1
            raise InputError(f"{path}: size line declares {nnz} entries, found {len(entries)}", line=where, column=1)
        row_idx = np.empty(nnz, dtype=np.int64)
        col_idx = np.empty(nnz, dtype=np.int64)
        values = np.empty(nnz, dtype=np.complex128)
        for k, (line_number, text) in enumerate(entries):
            tokens = _tokens(text)
            if len(tokens) != 2 + width:
                raise InputError(f"{path}: expected {2 + width} fields, got {len(tokens)}", line=line_number, column=1)
            row_idx[k] = _index(tokens[0][0], n, line_number, tokens[0][1], path)
            col_idx[k] = _index(tokens[1][0], n, line_number, tokens[1][1], path)
            re_part = _number(tokens[2][0], line_number, tokens[2][1], path)
            im_part = _number(tokens[3][0], line_number, tokens[3][1], path) if width == 2 else 0.0
            values[k] = complex(re_part, im_part)
        S = scipy.sparse.coo_matrix((values, (row_idx, col_idx)), shape=(n, n))
        return as_sparse(S)

    if len(entries) != n * n:
        raise InputError(f"{path}: array layout needs {n * n} values, found {len(entries)}", line=len(lines) + 1, column=1)
    values = np.empty(n * n, dtype=np.complex128)
    for k, (line_number, text) in enumerate(entries):
        tokens = _tokens(text)
        if len(tokens) != width:
            raise InputError(f"{path}: expected {width} fields, got {len(tokens)}", line=line_number, column=1)
        re_part = _number(tokens[0][0], line_number, tokens[0][1], path)
        im_part = _number(tokens[1][0], line_number, tokens[1][1], path) if width == 2 else 0.0
        values[k] = complex(re_part, im_part)
    dense = values.reshape((n, n), order="F")
    S = scipy.sparse.csr_matrix(dense)
    S.eliminate_zeros()
    return as_sparse(S)
