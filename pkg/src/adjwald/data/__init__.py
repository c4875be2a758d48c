"""Embedded datasets and their model specifications.

``clotting``: 18 mean blood clotting times for nine plasma
concentrations and two lots of clotting agent; modelled as gamma with
log link on log-concentration, a lot-2 indicator and their interaction
(the log transform of concentration is the coding that reproduces the
published fit).

``crying_babies``: 18 matched day-pairs of binomial counts (controls
not crying out of n, plus one lulled child per day); logistic model
with one intercept per day and a lulling effect.

``reading_skills``: the reading-accuracy study design (44 children,
dyslexia coded +1 for non-dyslexic / -1 for dyslexic, standardized
nonverbal IQ; beta regression with mean ~ dyslexia * iq and log
precision ~ dyslexia + iq).  The original responses are not
redistributable here; ``load_reading_skills`` looks for a user-supplied
transcription at data/reading_skills.csv (columns accuracy, dyslexia
in {no, yes}, iq) and raises otherwise.  A synthetic stand-in drawn
from the published fit ships as reading_skills_synthetic.csv and is
loaded by ``load_reading_skills_synthetic``.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..beta.model import BetaSpec
from ..glm.fit import GlmSpec

_HERE = Path(__file__).parent

READING_SKILLS_ML = {
    "beta": np.array([1.123, -0.742, 0.486, -0.581]),
    "gamma": np.array([3.304, 1.747, 1.229]),
}


def _read_csv(path):
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        rows = list(reader)
    return rows


def load_clotting() -> GlmSpec:
    rows = _read_csv(_HERE / "clotting.csv")
    time = np.array([float(r["time"]) for r in rows])
    conc = np.array([float(r["conc"]) for r in rows])
    lot2 = np.array([1.0 if r["lot"] == "2" else 0.0 for r in rows])
    lx = np.log(conc)
    x = np.column_stack([np.ones(len(rows)), lx, lot2, lx * lot2])
    return GlmSpec(
        "gamma-log", x, time,
        names=["(intercept)", "log_conc", "lot2", "log_conc:lot2"],
    )


def load_crying_babies() -> GlmSpec:
    rows = _read_csv(_HERE / "crying_babies.csv")
    n_days = len(rows)
    y, m, day, lulled = [], [], [], []
    for r in rows:
        d = int(r["day"])
        n_c = float(r["controls"])
        y.append(float(r["controls_not_crying"]) / n_c)
        m.append(n_c)
        day.append(d)
        lulled.append(0.0)
        y.append(float(r["lulled_not_crying"]))
        m.append(1.0)
        day.append(d)
        lulled.append(1.0)
    x = np.zeros((2 * n_days, n_days + 1))
    for i, d in enumerate(day):
        x[i, d - 1] = 1.0
    x[:, n_days] = lulled
    names = [f"day{d}" for d in range(1, n_days + 1)] + ["lulled"]
    return GlmSpec("binomial-logit", x, np.array(y), np.array(m), names=names)


def _reading_spec_from_rows(rows) -> BetaSpec:
    y = np.array([float(r["accuracy"]) for r in rows])
    dys = np.array([1.0 if r["dyslexia"].strip() == "no" else -1.0 for r in rows])
    iq = np.array([float(r["iq"]) for r in rows])
    n = len(rows)
    x = np.column_stack([np.ones(n), dys, iq, dys * iq])
    z = np.column_stack([np.ones(n), dys, iq])
    return BetaSpec(
        x, z, y,
        mean_names=["(intercept)", "dyslexia", "iq", "dyslexia:iq"],
        precision_names=["(intercept)", "dyslexia", "iq"],
    )


def load_reading_skills() -> BetaSpec:
    path = _HERE / "reading_skills.csv"
    if not path.exists():
        raise FileNotFoundError(
            "reading_skills.csv is not bundled (the original responses are not "
            "redistributable here); place a transcription with columns "
            "accuracy, dyslexia (no/yes), iq at "
            f"{path} to enable the reproduction checks"
        )
    return _reading_spec_from_rows(_read_csv(path))


def load_reading_skills_synthetic() -> BetaSpec:
    return _reading_spec_from_rows(_read_csv(_HERE / "reading_skills_synthetic.csv"))
