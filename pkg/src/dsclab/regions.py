"""Rate-distortion regions as explicit linear inequality systems.

Two families are built from a problem description with fixed test
channels: the information-theoretic region (rate sums bounded by
conditional entropies of the sources and descriptions) and the
constrained-generator region, which carries one auxiliary variable r_i
per quantizing encoder.  Fourier-Motzkin elimination projects the
auxiliary variables out; membership tests, pointwise equivalence probes,
and the classic closed-form specializations sit alongside.

All rows are "greater or equal" rows: sum_k c_k v_k >= b.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .sources import ProblemSpec, attach_test_channels, memoryless_extend
from .spectrum import entropy_quantities

CONTAIN_TOL = 1e-9

EXAMPLE_IDS = ("slepian_wolf", "p2p_lossy", "side_info_lossy", "helper",
               "distributed_lossy", "berger_tung_memoryless")


@dataclass
class LinearSystem:
    variables: list
    rows: list = field(default_factory=list)   # (coeff tuple, constant)

    def __post_init__(self):
        for coeffs, b in self.rows:
            self._check_row(coeffs, b)

    def _check_row(self, coeffs, b):
        if len(coeffs) != len(self.variables):
            raise ValueError("coefficient arity mismatch")
        if not _finite(b) or not all(_finite(c) for c in coeffs):
            raise ValueError("non-finite row")

    def add(self, coeffs, b):
        coeffs = tuple(coeffs)
        self._check_row(coeffs, b)
        self.rows.append((coeffs, b))

    def add_named(self, terms: dict, b):
        coeffs = [0] * len(self.variables)
        for name, c in terms.items():
            coeffs[self.variables.index(name)] = c
        self.add(coeffs, b)

    def to_text(self) -> str:
        lines = [" ".join(self.variables)]
        for coeffs, b in self.rows:
            lines.append(" ".join(_fmt(c) for c in coeffs) + " >= " + _fmt(b))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LinearSystem":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty system text")
        variables = lines[0].split()
        sys = cls(variables=variables)
        for ln in lines[1:]:
            lhs, rhs = ln.split(">=")
            coeffs = [_parse_num(tok) for tok in lhs.split()]
            sys.add(coeffs, _parse_num(rhs.strip()))
        return sys

    def evaluate(self, point: dict):
        """Per-row slack (lhs - b) at the point; negative means violated."""
        missing = [v for v in self.variables if v not in point]
        if missing:
            raise ValueError(f"point is missing {missing}")
        vals = [point[v] for v in self.variables]
        return [sum(c * x for c, x in zip(coeffs, vals)) - b
                for coeffs, b in self.rows]


@dataclass
class RatePoint:
    values: dict

    def __post_init__(self):
        for name, v in self.values.items():
            if not _finite(v):
                raise ValueError(f"non-finite value for {name}")
            if (name.startswith("R_") or name.startswith("r_")) and v < 0:
                raise ValueError(f"negative rate {name}={v}")

    def as_dict(self) -> dict:
        return dict(self.values)


def _finite(v) -> bool:
    if isinstance(v, Fraction):
        return True
    return math.isfinite(float(v))


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _parse_num(tok: str):
    if "/" in tok:
        return Fraction(tok)
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def contains(system: LinearSystem, point, tol=CONTAIN_TOL) -> bool:
    """True when every inequality holds at the point within tolerance."""
    if isinstance(point, RatePoint):
        point = point.as_dict()
    return all(float(s) >= -tol for s in system.evaluate(point))


# ---------------------------------------------------------------------------
# Fourier-Motzkin elimination
# ---------------------------------------------------------------------------

def _is_exact(system: LinearSystem) -> bool:
    for coeffs, b in system.rows:
        for v in list(coeffs) + [b]:
            if not isinstance(v, (int, np.integer, Fraction)):
                return False
    return True


def _normalize_row(coeffs, b, exact):
    scale = max((abs(c) for c in coeffs if c != 0), default=None)
    if scale is None:
        return tuple(coeffs), b
    if exact:
        scale = Fraction(scale)
        return tuple(Fraction(c) / scale for c in coeffs), Fraction(b) / scale
    return tuple(float(c) / float(scale) for c in coeffs), float(b) / float(scale)


def _prune(rows, exact):
    """Drop vacuous rows and rows dominated by another row with the same
    normal direction (pairwise dominance only)."""
    tol = 0 if exact else 1e-9
    normalized = [_normalize_row(c, b, exact) for c, b in rows]
    kept = []
    for coeffs, b in normalized:
        if all(c == 0 for c in coeffs):
            if float(b) > tol:
                kept.append((coeffs, b))   # infeasible marker row, keep it
            continue
        kept.append((coeffs, b))
    out = []
    for idx, (coeffs, b) in enumerate(kept):
        dominated = False
        for jdx, (c2, b2) in enumerate(kept):
            if idx == jdx:
                continue
            if _same_direction(coeffs, c2, tol):
                if float(b2) > float(b) + tol:
                    dominated = True
                elif abs(float(b2) - float(b)) <= tol and jdx < idx:
                    dominated = True   # exact duplicate: keep the first copy
                if dominated:
                    break
        if not dominated:
            out.append((coeffs, b))
    return out


def _same_direction(c1, c2, tol):
    return all(abs(float(a) - float(b)) <= tol for a, b in zip(c1, c2))


def fourier_motzkin(system: LinearSystem, eliminate_vars) -> LinearSystem:
    """Project the feasible set onto the remaining variables.

    Exact rational arithmetic is used when every entry is an int or
    Fraction; otherwise double precision with a small slack in pruning.
    """
    exact = _is_exact(system)
    work_vars = list(system.variables)
    rows = [(tuple(c), b) for c, b in system.rows]
    for var in eliminate_vars:
        if var not in work_vars:
            raise ValueError(f"unknown variable {var!r}")
        k = work_vars.index(var)
        pos, neg, zero = [], [], []
        for coeffs, b in rows:
            c = coeffs[k]
            if float(c) > 0:
                pos.append((coeffs, b))
            elif float(c) < 0:
                neg.append((coeffs, b))
            else:
                zero.append((coeffs, b))
        combined = list(zero)
        for (cp, bp), (cn, bn) in itertools.product(pos, neg):
            # cp[k] x >= ...  and  cn[k] x >= ...  with cn[k] < 0 give an
            # upper bound; scale to cancel the eliminated coordinate.
            if exact:
                sp, sn = Fraction(cp[k]), -Fraction(cn[k])
                coeffs = tuple(Fraction(a) * sn + Fraction(c) * sp
                               for a, c in zip(cp, cn))
                b = Fraction(bp) * sn + Fraction(bn) * sp
            else:
                sp, sn = float(cp[k]), -float(cn[k])
                coeffs = tuple(float(a) * sn + float(c) * sp
                               for a, c in zip(cp, cn))
                b = float(bp) * sn + float(bn) * sp
            combined.append((coeffs, b))
        rows = [(_drop(c, k), b) for c, b in combined]
        work_vars.pop(k)
        rows = _prune(rows, exact)
    return LinearSystem(variables=work_vars, rows=rows)


def _drop(coeffs, k):
    return tuple(c for j, c in enumerate(coeffs) if j != k)


# ---------------------------------------------------------------------------
# Region construction from a problem description
# ---------------------------------------------------------------------------

def _letter_block(spec: ProblemSpec):
    return attach_test_channels(memoryless_extend(spec, 1), spec)


def _h(block, target, given) -> float:
    return entropy_quantities(block, target, given)


def expected_distortions(spec: ProblemSpec) -> dict:
    """E[d_j(X_I, Y, Z_j)] under the letter joint, channels, and the
    deterministic reproduction maps."""
    out = {}
    letter = _letter_block(spec)
    k = len(spec.encoders)
    for j in spec.lossy:
        rep = spec.reproductions[j]
        dist = spec.distortions[j]
        total = 0.0
        it = np.nditer(letter.probs, flags=["multi_index"])
        for p in it:
            if p == 0:
                continue
            idx = it.multi_index
            x = idx[:k]
            y = idx[k]
            w = idx[k + 1:]
            z = int(rep[tuple(w) + (y,)])
            total += float(p) * float(dist[x + (y, z)])
        out[j] = total
    return out


def build_rit(spec: ProblemSpec) -> LinearSystem:
    """Rate rows for every nonempty encoder subset, split by lossless and
    quantizing membership, plus one distortion row per reproduction."""
    block = _letter_block(spec)
    ids = list(spec.encoders)
    lossless = [i for i in ids if i in spec.lossless]
    coded = [i for i in ids if i not in spec.lossless]
    variables = [f"R_{i}" for i in ids] + [f"D_{j}" for j in spec.lossy]
    sys = LinearSystem(variables=variables)
    seen = set()
    all_coded_w = [f"w_{i}" for i in coded]
    for subset in _nonempty_subsets(ids):
        s = [i for i in subset if i in lossless]
        t = [i for i in subset if i not in lossless]
        if s and ("s", tuple(s)) not in seen:
            seen.add(("s", tuple(s)))
            given = all_coded_w + [f"x_{i}" for i in lossless if i not in s] + ["y"]
            b = _h(block, [f"x_{i}" for i in s], given)
            sys.add_named({f"R_{i}": 1 for i in s}, b)
        if t and ("t", tuple(t)) not in seen:
            seen.add(("t", tuple(t)))
            rest = [f"w_{i}" for i in coded if i not in t]
            b = _h(block, [f"w_{i}" for i in t], rest + ["y"])
            b -= sum(_h(block, [f"w_{i}"], [f"x_{i}"]) for i in t)
            sys.add_named({f"R_{i}": 1 for i in t}, b)
    for j, ed in expected_distortions(spec).items():
        sys.add_named({f"D_{j}": 1}, ed)
    return sys


def build_rcrng_with_aux(spec: ProblemSpec) -> LinearSystem:
    """The constrained-generator region before eliminating the per-encoder
    generation rates r_i."""
    block = _letter_block(spec)
    ids = list(spec.encoders)
    lossless = [i for i in ids if i in spec.lossless]
    coded = [i for i in ids if i not in spec.lossless]
    variables = [f"r_{i}" for i in coded] + [f"R_{i}" for i in ids] \
        + [f"D_{j}" for j in spec.lossy]
    sys = LinearSystem(variables=variables)
    for i in coded:
        h_wx = _h(block, [f"w_{i}"], [f"x_{i}"])
        sys.add_named({f"r_{i}": 1}, 0.0)
        sys.add_named({f"r_{i}": -1}, -h_wx)
    for subset in _nonempty_subsets(ids):
        s = [i for i in subset if i in lossless]
        t = [i for i in subset if i not in lossless]
        comp_s = [i for i in lossless if i not in s]
        comp_t = [i for i in coded if i not in t]
        target = [f"w_{i}" for i in t] + [f"x_{i}" for i in s]
        given = [f"w_{i}" for i in comp_t] + [f"x_{i}" for i in comp_s] + ["y"]
        b = _h(block, target, given)
        terms = {f"R_{i}": 1 for i in subset}
        for i in t:
            terms[f"r_{i}"] = 1
        sys.add_named(terms, b)
    for j, ed in expected_distortions(spec).items():
        sys.add_named({f"D_{j}": 1}, ed)
    return sys


def eliminate_generation_rates(spec: ProblemSpec) -> LinearSystem:
    aux = [f"r_{i}" for i in spec.encoders if i not in spec.lossless]
    return fourier_motzkin(build_rcrng_with_aux(spec), aux)


def _nonempty_subsets(ids):
    for size in range(1, len(ids) + 1):
        yield from itertools.combinations(ids, size)


# ---------------------------------------------------------------------------
# Equivalence probing
# ---------------------------------------------------------------------------

def region_equivalence_probe(sys_a: LinearSystem, sys_b: LinearSystem,
                             sample_count=1000, seed=0, box=None) -> dict:
    """Sampled membership agreement over a bounding box, with witnesses."""
    if set(sys_a.variables) != set(sys_b.variables):
        raise ValueError("systems must share their retained variables")
    names = list(sys_a.variables)
    if box is None:
        consts = [abs(float(b)) for _, b in sys_a.rows + sys_b.rows]
        hi = 1.0 + 2.0 * max(consts, default=1.0)
        box = {nm: (0.0, hi) for nm in names}
    rng = np.random.default_rng(seed)
    lows = np.array([box[nm][0] for nm in names])
    highs = np.array([box[nm][1] for nm in names])
    pts = rng.uniform(lows, highs, size=(sample_count, len(names)))
    counts = {"both": 0, "only_a": 0, "only_b": 0, "neither": 0}
    witnesses = {"only_a": [], "only_b": []}
    for row in pts:
        point = dict(zip(names, row))
        in_a = contains(sys_a, point)
        in_b = contains(sys_b, point)
        key = {(True, True): "both", (True, False): "only_a",
               (False, True): "only_b", (False, False): "neither"}[(in_a, in_b)]
        counts[key] += 1
        if key in witnesses and len(witnesses[key]) < 5:
            witnesses[key].append(point)
    agree = (counts["both"] + counts["neither"]) / sample_count
    return {"samples": sample_count, "agreement": agree, "counts": counts,
            "witnesses": witnesses,
            "a_subset_of_b": counts["only_a"] == 0,
            "b_subset_of_a": counts["only_b"] == 0}


# ---------------------------------------------------------------------------
# Closed-form specializations
# ---------------------------------------------------------------------------

def specialize_example(example_id: str, spec: ProblemSpec) -> LinearSystem:
    """The classic closed-form systems, with entropy constants computed from
    the problem's own tables."""
    if example_id not in EXAMPLE_IDS:
        raise ValueError(f"unknown example id {example_id!r}")
    block = _letter_block(spec)
    ids = list(spec.encoders)
    if example_id == "slepian_wolf":
        if set(spec.lossless) != set(ids):
            raise ValueError("all encoders must be lossless here")
        sys = LinearSystem(variables=[f"R_{i}" for i in ids])
        for subset in _nonempty_subsets(ids):
            rest = [f"x_{i}" for i in ids if i not in subset]
            b = _h(block, [f"x_{i}" for i in subset], rest + ["y"])
            sys.add_named({f"R_{i}": 1 for i in subset}, b)
        return sys
    if example_id in ("p2p_lossy", "side_info_lossy"):
        (i,) = ids
        if i in spec.lossless:
            raise ValueError("the single encoder must quantize")
        sys = LinearSystem(variables=[f"R_{i}"] + [f"D_{j}" for j in spec.lossy])
        given = ["y"] if example_id == "side_info_lossy" else []
        b = _h(block, [f"w_{i}"], given) - _h(block, [f"w_{i}"], [f"x_{i}"])
        sys.add_named({f"R_{i}": 1}, b)
        for j, ed in expected_distortions(spec).items():
            sys.add_named({f"D_{j}": 1}, ed)
        return sys
    if example_id == "helper":
        coded = [i for i in ids if i not in spec.lossless]
        if len(coded) != 1 or len(ids) < 2:
            raise ValueError("need one helper plus lossless encoders")
        (h,) = coded
        main = [i for i in ids if i != h]
        sys = LinearSystem(variables=[f"R_{i}" for i in ids])
        b = _h(block, [f"w_{h}"], []) - _h(block, [f"w_{h}"], [f"x_{h}"])
        sys.add_named({f"R_{h}": 1}, b)
        for subset in _nonempty_subsets(main):
            rest = [f"x_{i}" for i in main if i not in subset]
            b = _h(block, [f"x_{i}" for i in subset], [f"w_{h}"] + rest + ["y"])
            sys.add_named({f"R_{i}": 1 for i in subset}, b)
        return sys
    if example_id == "distributed_lossy":
        coded = [i for i in ids if i not in spec.lossless]
        if coded != ids:
            raise ValueError("all encoders must quantize here")
        sys = LinearSystem(variables=[f"R_{i}" for i in ids]
                           + [f"D_{j}" for j in spec.lossy])
        for subset in _nonempty_subsets(ids):
            rest = [f"w_{i}" for i in ids if i not in subset]
            b = _h(block, [f"w_{i}" for i in subset], rest + ["y"])
            b -= sum(_h(block, [f"w_{i}"], [f"x_{i}"]) for i in subset)
            sys.add_named({f"R_{i}": 1 for i in subset}, b)
        for j, ed in expected_distortions(spec).items():
            sys.add_named({f"D_{j}": 1}, ed)
        return sys
    # berger_tung_memoryless
    coded = [i for i in ids if i not in spec.lossless]
    if coded != ids:
        raise ValueError("all encoders must quantize here")
    sys = LinearSystem(variables=[f"R_{i}" for i in ids]
                       + [f"D_{j}" for j in spec.lossy])
    for subset in _nonempty_subsets(ids):
        rest = [f"w_{i}" for i in ids if i not in subset]
        w_sub = [f"w_{i}" for i in subset]
        x_sub = [f"x_{i}" for i in subset]
        b = _h(block, x_sub, rest + ["y"]) \
            - _h(block, x_sub, w_sub + rest + ["y"])
        sys.add_named({f"R_{i}": 1 for i in subset}, b)
    for j, ed in expected_distortions(spec).items():
        sys.add_named({f"D_{j}": 1}, ed)
    return sys
