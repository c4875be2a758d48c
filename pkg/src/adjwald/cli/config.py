"""Run configuration: INI-style file with sections, overridden by flags.

Model columns may be raw CSV column names, ``log(col)`` transforms or
``a*b`` interactions of two columns; anything else is a config error.
"""

from __future__ import annotations

import configparser
import csv
from pathlib import Path

import numpy as np

from ..errors import ConfigError, DataError

GLM_FAMILIES = (
    "binomial-logit",
    "binomial-probit",
    "poisson-log",
    "gamma-log",
    "gaussian-identity",
)


def read_config(path, overrides=()):
    """Parse an INI config file plus ``section.key=value`` overrides."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    if path is not None:
        if not Path(path).exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file: {exc}") from exc
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value: {item!r}")
        key, value = item.split("=", 1)
        section, option = key.split(".", 1)
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section.strip(), option.strip(), value.strip())
    return parser


def get(parser, section, key, default=None):
    try:
        return parser.get(section, key)
    except (configparser.NoSectionError, configparser.NoOptionError):
        return default


def get_list(parser, section, key, default=()):
    raw = get(parser, section, key)
    if raw is None:
        return list(default)
    return [tok.strip() for tok in raw.split(",") if tok.strip()]


def get_float_list(parser, section, key, default=()):
    try:
        return [float(tok) for tok in get_list(parser, section, key, default)]
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} must be a comma-separated number list") from exc


def read_table(path):
    """Read a headered CSV into a dict of float/str columns.

    Numeric parsing failures report the 1-based data row.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"data file not found: {path}")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("data file is empty") from None
        header = [h.strip() for h in header]
        rows = []
        for idx, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"row {idx} has {len(row)} fields, expected {len(header)}", row=idx
                )
            rows.append([cell.strip() for cell in row])
    columns = {}
    for c, name in enumerate(header):
        raw = [r[c] for r in rows]
        try:
            columns[name] = np.array([float(v) for v in raw])
        except ValueError:
            columns[name] = np.array(raw, dtype=object)
    return columns, len(rows)


def numeric_column(columns, name, purpose):
    if name not in columns:
        raise DataError(f"{purpose} column {name!r} not found in data")
    col = columns[name]
    if col.dtype == object:
        # factor column with two levels -> 0/1 indicator on the sorted levels
        levels = sorted(set(col.tolist()))
        if len(levels) != 2:
            raise DataError(
                f"{purpose} column {name!r} is non-numeric with {len(levels)} levels; "
                "only two-level factors are encoded automatically"
            )
        return np.array([1.0 if v == levels[1] else 0.0 for v in col])
    return col.astype(float)


def resolve_term(columns, term):
    """A design column: ``col``, ``log(col)`` or ``a*b``."""
    term = term.strip()
    if term.startswith("log(") and term.endswith(")"):
        base = numeric_column(columns, term[4:-1].strip(), "model")
        if np.any(base <= 0):
            raise DataError(f"log transform of {term[4:-1]!r} hit non-positive values")
        return np.log(base), term
    if "*" in term:
        left, right = (t.strip() for t in term.split("*", 1))
        a, _ = resolve_term(columns, left)
        b, _ = resolve_term(columns, right)
        return a * b, term
    return numeric_column(columns, term, "model"), term


def build_design(columns, n_rows, terms, add_intercept=True):
    mats = []
    names = []
    if add_intercept:
        mats.append(np.ones(n_rows))
        names.append("(intercept)")
    for term in terms:
        col, name = resolve_term(columns, term)
        mats.append(col)
        names.append(name)
    if not mats:
        raise ConfigError("model needs at least an intercept or one column")
    return np.column_stack(mats), names


def model_from_config(parser, data_path=None):
    """Build a model spec and kind ('glm' or 'beta') from the config."""
    from ..beta.model import BetaSpec
    from ..glm.fit import GlmSpec

    kind = get(parser, "model", "kind") or get(parser, "model", "model") or "glm"
    path = data_path or get(parser, "data", "path")
    if path is None:
        raise ConfigError("no data path given ([data] path or --data)")
    columns, n_rows = read_table(path)
    response = get(parser, "model", "response")
    if response is None:
        raise ConfigError("[model] response is required")
    y = numeric_column(columns, response, "response")
    add_intercept = get(parser, "model", "add_intercept", "true").lower() != "false"
    terms = get_list(parser, "model", "mean_columns") or get_list(
        parser, "model", "mean_formula"
    )
    x, names = build_design(columns, n_rows, terms, add_intercept)
    if kind == "glm":
        family = get(parser, "model", "family")
        if family not in GLM_FAMILIES:
            raise ConfigError(
                f"[model] family must be one of {GLM_FAMILIES}, got {family!r}"
            )
        weights_col = get(parser, "model", "weights")
        m = numeric_column(columns, weights_col, "weights") if weights_col else None
        if family.startswith("binomial") and weights_col:
            y = y / m  # counts with trials column -> proportions
        known = get(parser, "model", "dispersion_known")
        spec = GlmSpec(
            family, x, y, m,
            dispersion_known=float(known) if known else None,
            names=names,
        )
        return "glm", spec
    if kind == "beta":
        zterms = get_list(parser, "model", "precision_columns") or get_list(
            parser, "model", "precision_formula"
        )
        z, znames = build_design(columns, n_rows, zterms, add_intercept)
        spec = BetaSpec(x, z, y, mean_names=names, precision_names=znames)
        return "beta", spec
    raise ConfigError(f"[model] kind must be glm or beta, got {kind!r}")
