"""Experiment configuration files: a TOML grammar for problems, codes, and
run parameters.

Probabilities may be written as decimals or as rational strings "a/b";
tables are nested arrays.  The same builders back the command line and the
service layer, so a config parsed from disk and one posted as JSON go
through identical validation.

Layout of a full config:

    [problem]
    encoders = ["1", "2"]
    lossless = ["1"]
    y_alphabet = 2
    x_alphabets = { 1 = 2, 2 = 2 }
    letter_joint = [...]               # shape (*x_alphabets, y_alphabet)

    [problem.test_channels.2]          # one per non-lossless encoder
    table = [...]                      # shape (x_alphabet, w_alphabet)

    [problem.lossy.d]                  # one per reproduction index
    reproduction = [...]               # shape (*w_alphabets, y_alphabet)
    distortion = [...]                 # shape (*x_alphabets, y, z)
    z_alphabet = 2
    level = "1/10"

    [code.1]
    g_kind = "uniform_linear"          # bin hash ensemble
    g_rows = 6                         # or R_target = 0.75
    f_kind = "sparse_linear"           # constraint hash (non-lossless only)
    f_rows = 2                         # or r_target = 0.25

    [simulate]
    n_list = [8, 12, 16]
    trials = 2000
    delta = 0.05
    decoder = "map"                    # map | crng | typical
    seed = 7

    [region]
    mode = "rit"                       # rit | rcrng | rcrng_eliminated | specialized
    example = "slepian_wolf"           # when mode = specialized

    [spectrum]
    target = ["x_1"]
    given = ["y"]
    kind = "sup_entropy_rate"
    epsilon_tail = 0.001
    n_list = [16, 32, 64]
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import tomli

from .hashes import HashEnsembleSpec
from .sources import ProblemSpec


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        return tomli.load(fh)


def parse_config_text(text: str) -> dict:
    return tomli.loads(text)


def as_number(value) -> float:
    """Accept ints, floats, and rational strings like '3/10'."""
    if isinstance(value, str):
        return float(Fraction(value))
    if isinstance(value, (int, float)):
        return float(value)
    raise ValueError(f"cannot interpret {value!r} as a number")


def as_array(nested) -> np.ndarray:
    """Nested lists with rational-string leaves to a float array."""
    def walk(node):
        if isinstance(node, list):
            return [walk(x) for x in node]
        return as_number(node)
    return np.array(walk(nested), dtype=float)


def build_problem(section: dict) -> ProblemSpec:
    encoders = [str(e) for e in section["encoders"]]
    lossless = [str(e) for e in section.get("lossless", [])]
    x_alphabets = {str(k): int(v) for k, v in section["x_alphabets"].items()}
    lossy_section = section.get("lossy", {})
    if isinstance(lossy_section, list):
        raise ValueError("lossy must be a table of reproduction settings")
    lossy = [str(j) for j in lossy_section]
    w_alphabets = {}
    test_channels = {}
    for i, sub in section.get("test_channels", {}).items():
        table = as_array(sub["table"])
        test_channels[str(i)] = table
        w_alphabets[str(i)] = table.shape[1]
    reproductions = {}
    distortions = {}
    z_alphabets = {}
    levels = {}
    for j, sub in lossy_section.items():
        reproductions[str(j)] = np.asarray(sub["reproduction"], dtype=np.int64)
        distortions[str(j)] = as_array(sub["distortion"])
        z_alphabets[str(j)] = int(sub["z_alphabet"])
        levels[str(j)] = as_number(sub.get("level", 0.0))
    return ProblemSpec(
        encoders=encoders,
        lossless=lossless,
        lossy=lossy,
        x_alphabets=x_alphabets,
        y_alphabet=int(section["y_alphabet"]),
        letter_joint=as_array(section["letter_joint"]),
        w_alphabets=w_alphabets,
        test_channels=test_channels,
        reproductions=reproductions,
        distortions=distortions,
        z_alphabets=z_alphabets,
        distortion_levels=levels,
    )


def resolve_rows(target_rate, explicit_rows, n: int, q: int):
    """Rate targets become integer row counts; both views are reported."""
    if explicit_rows is not None:
        rows = int(explicit_rows)
    elif target_rate is not None:
        rows = round(as_number(target_rate) * n / np.log2(q))
    else:
        raise ValueError("need either a row count or a rate target")
    rows = max(rows, 0)
    return rows, rows * float(np.log2(q)) / n


def build_code_plan(code_section: dict, problem: ProblemSpec, n: int):
    """Hash specs for every encoder at one block length.

    Returns (plans, achieved) where achieved maps encoder id to the
    realized (r, R) pair after row-count rounding.
    """
    from .codec import CodePlan

    plans = {}
    achieved = {}
    for i in problem.encoders:
        sec = code_section.get(str(i), {})
        alphabet = problem.w_alphabet(i)
        g_spec, big_r = _hash_spec(sec, "g", alphabet, n, "uniform_linear")
        f_spec = None
        small_r = 0.0
        if i not in problem.lossless and any(
                sec.get(k) is not None for k in ("f_kind", "f_rows", "r_target")):
            f_spec, small_r = _hash_spec(sec, "f", alphabet, n, "uniform_linear")
        plans[i] = CodePlan(f_spec=f_spec, g_spec=g_spec)
        achieved[i] = (small_r, big_r)
    return plans, achieved


def _hash_spec(sec: dict, role: str, alphabet: int, n: int, default_kind: str):
    kind = sec.get(f"{role}_kind", default_kind)
    target_key = "R_target" if role == "g" else "r_target"
    if kind == "random_binning":
        if sec.get(f"{role}_image") is not None:
            image = int(sec[f"{role}_image"])
        elif sec.get(target_key) is not None:
            image = max(1, round(2 ** (as_number(sec[target_key]) * n)))
        else:
            raise ValueError(f"binning hash {role!r} needs an image size "
                             "or a rate target")
        spec = HashEnsembleSpec(kind=kind, alphabet=alphabet,
                                block_length=n, image_size=image)
        return spec, float(np.log2(image)) / n
    rows, rate = resolve_rows(sec.get(target_key), sec.get(f"{role}_rows"),
                              n, alphabet)
    spec = HashEnsembleSpec(kind=kind, alphabet=alphabet, block_length=n,
                            image_size=alphabet ** rows, q=alphabet,
                            column_degree=sec.get(f"{role}_degree"))
    return spec, rate
