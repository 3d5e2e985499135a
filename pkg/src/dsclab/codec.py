"""Constrained-random-number-generator source codes.

Encoder i draws its description block w_i from the test-channel law
conditioned on a hash constraint f_i(w_i) = c_i, then transmits the bin
index m_i = g_i(w_i).  The decoder knows (c_I, m_I, y) and recovers the
whole tuple w_I from the posterior restricted to the constraint set,
either by re-running a constrained generator, by posterior maximization,
or through a typical-set rule.  Lossless encoders degenerate to w_i = x_i
with a single constraint value, which turns the scheme into plain random
binning.

Everything is exact at desk scale: conditional laws are enumerated (with
linear-algebra shortcuts for matrix hashes), so encoder and decoder
distributions can be checked in total variation, not just sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .blocks import all_blocks, index_to_symbols, symbols_to_index
from .fields import AffineSolver
from .hashes import DrawnHash, HashEnsembleSpec, draw
from .sources import (BlockDistribution, ProblemSpec, StateSpaceError,
                      block_distortion, memoryless_extend, reproduce,
                      sample_block)

CRNG_STATE_GUARD = 1 << 24
EXACT_SOURCE_GUARD = 1 << 16

OK = "ok"
ENCODER_ERROR = "encoder_error"
DECODER_EMPTY = "decoder_empty_constraint"


class EmptySupportError(RuntimeError):
    """The constrained sampler was left with an empty support; encoders
    surface this as a declared error."""


@dataclass
class CodePlan:
    """Ensemble choices for one encoder before drawing: the constraint hash
    (None for lossless encoders, whose constraint is trivial) and the bin
    hash."""

    f_spec: HashEnsembleSpec | None
    g_spec: HashEnsembleSpec


@dataclass
class EncoderCode:
    encoder_id: str
    f: DrawnHash | None
    g: DrawnHash
    c: int = 0

    @property
    def constraint_image(self) -> int:
        return 1 if self.f is None else self.f.spec.image_size


@dataclass
class CodeConfig:
    """A drawn code realization shared by all encoders and the decoder."""

    problem: ProblemSpec
    n: int
    codes: dict

    def __post_init__(self):
        for i in self.problem.encoders:
            if i not in self.codes:
                raise ValueError(f"no code for encoder {i!r}")
            code = self.codes[i]
            if i in self.problem.lossless and code.f is not None:
                raise ValueError(f"lossless encoder {i!r} must have a trivial "
                                 "constraint (f=None)")
            for h in (code.f, code.g):
                if h is None:
                    continue
                if h.spec.block_length != self.n:
                    raise ValueError(f"hash block length {h.spec.block_length} "
                                     f"!= n={self.n}")
                if h.spec.alphabet != self.problem.w_alphabet(i):
                    raise ValueError(f"hash alphabet mismatch for {i!r}")
            if not 0 <= code.c < code.constraint_image:
                raise ValueError(f"constraint value {code.c} outside the image "
                                 f"of f_{i}")
        self._ctx = {}

    def r(self, i) -> float:
        return math.log2(self.codes[i].constraint_image) / self.n

    def R(self, i) -> float:
        return math.log2(self.codes[i].g.spec.image_size) / self.n

    def rates(self) -> dict:
        return {i: (self.r(i), self.R(i)) for i in self.problem.encoders}


def draw_code(problem: ProblemSpec, n: int, plans: dict, seed) -> CodeConfig:
    """Draw all hashes and constraint values from one master seed.

    Constraint values c_i are drawn uniformly from the image of f_i, which
    realizes the shared-randomness part of the code.
    """
    codes = {}
    for pos, i in enumerate(problem.encoders):
        plan = plans[i]
        f = None
        if plan.f_spec is not None:
            f = draw(plan.f_spec, child_seed(seed, 1, pos))
        g = draw(plan.g_spec, child_seed(seed, 2, pos))
        c = 0
        if f is not None and f.spec.image_size > 1:
            rng = np.random.default_rng(child_seed(seed, 3, pos))
            c = int(rng.integers(0, f.spec.image_size))
        codes[i] = EncoderCode(encoder_id=i, f=f, g=g, c=c)
    return CodeConfig(problem=problem, n=n, codes=codes)


def child_seed(master, *path) -> np.random.SeedSequence:
    """Deterministic independent stream for a (role, trial, ...) path.

    Accepts an integer master seed or an already-derived SeedSequence, so
    seed trees compose.
    """
    if isinstance(master, np.random.SeedSequence):
        key = tuple(master.spawn_key) + tuple(int(p) for p in path)
        return np.random.SeedSequence(entropy=master.entropy, spawn_key=key)
    return np.random.SeedSequence([int(master) & 0xFFFFFFFF]
                                  + [int(p) for p in path])


@dataclass
class DecodeResult:
    w_hat: dict
    z: dict
    status: str
    flagged: bool = False

    @property
    def ok(self) -> bool:
        return self.status == OK


@dataclass
class TrialOutcome:
    trial: int
    status: str
    distortions: dict
    mismatches: dict
    failure: bool


# ---------------------------------------------------------------------------
# Constrained sampling
# ---------------------------------------------------------------------------

def restricted_distribution(conditional: BlockDistribution, constraints):
    """Exact law of a single block variable under hash constraints.

    Returns (block_indices, probabilities); raises EmptySupportError when the
    restriction kills all mass.
    """
    if len(conditional.names) != 1:
        raise ValueError("conditional must be a single-variable law")
    if conditional.state_count > CRNG_STATE_GUARD:
        raise StateSpaceError("conditional too large for exact restriction")
    weights = conditional.probs.reshape(-1).copy()
    for h, value in constraints:
        if not 0 <= int(value) < h.spec.image_size:
            raise EmptySupportError(
                f"constraint value {value} outside the hash image")
        weights[h.hash_all() != int(value)] = 0.0
    total = weights.sum()
    if total <= 0:
        raise EmptySupportError("constraints left an empty support")
    idx = np.nonzero(weights)[0]
    return idx, weights[idx] / total


def crng_sample(conditional: BlockDistribution, constraints, seed, count=None):
    """Draw from the constrained law.

    With count=None returns one symbol block; with an integer count returns
    a (count, n) array of blocks from a single seeded stream.
    """
    idx, probs = restricted_distribution(conditional, constraints)
    rng = np.random.default_rng(seed)
    if count is None:
        pick = int(idx[rng.choice(len(idx), p=probs)])
        return index_to_symbols(pick, conditional.alphabets[0], conditional.n)
    picks = idx[rng.choice(len(idx), size=int(count), p=probs)]
    return index_to_symbols(picks, conditional.alphabets[0], conditional.n)


@lru_cache(maxsize=32)
def _domain_blocks(alphabet: int, n: int) -> np.ndarray:
    return all_blocks(alphabet, n)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def _encoder_ctx(config: CodeConfig, i):
    """Per-encoder cached machinery: channel logs and the f-coset geometry."""
    key = ("enc", i)
    if key not in config._ctx:
        spec = config.problem
        code = config.codes[i]
        ctx = {"code": code}
        if i not in spec.lossless:
            ctx["log_ch"] = _safe_log(spec.test_channels[i])
            f = code.f
            if f is not None and f.matrix is not None and f.matrix.shape[0] > 0:
                solver = AffineSolver(f.matrix, f.spec.q)
                target = index_to_symbols(code.c, f.spec.q, f.spec.rows)
                ctx["coset"] = solver.enumerate(target)
            else:
                w_dom = spec.w_alphabet(i) ** config.n
                if w_dom > CRNG_STATE_GUARD:
                    raise StateSpaceError("encoder domain exceeds the guard")
                blocks = _domain_blocks(spec.w_alphabet(i), config.n)
                if f is None:
                    ctx["coset"] = blocks
                else:
                    mask = f.hash_all() == code.c
                    ctx["coset"] = blocks[mask]
        config._ctx[key] = ctx
    return config._ctx[key]


def _safe_log(table):
    with np.errstate(divide="ignore"):
        return np.where(table > 0, np.log(np.where(table > 0, table, 1.0)), -np.inf)


def _coset_weights(log_ch, x_sym, coset):
    """Unnormalized channel weights of each coset member given the source
    block; computed in log-space to dodge underflow at larger n."""
    lw = log_ch[x_sym[None, :], coset].sum(axis=1)
    top = lw.max()
    if not np.isfinite(top):
        return np.zeros(len(coset))
    return np.exp(lw - top)


def encode_full(i, x_i, config: CodeConfig, seed):
    """Run encoder i; returns (w_i, m_i).  Lossless encoders pass the source
    block straight through."""
    spec = config.problem
    x_sym = np.asarray(x_i, dtype=np.int64)
    if x_sym.shape != (config.n,):
        raise ValueError(f"x block must have length {config.n}")
    code = config.codes[i]
    if i in spec.lossless:
        return x_sym, int(code.g(x_sym))
    ctx = _encoder_ctx(config, i)
    coset = ctx["coset"]
    if coset is None or len(coset) == 0:
        raise EmptySupportError(f"constraint value {code.c} has an empty preimage")
    weights = _coset_weights(ctx["log_ch"], x_sym, coset)
    total = weights.sum()
    if total <= 0:
        raise EmptySupportError("channel law puts no mass on the constraint coset")
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(coset), p=weights / total)
    w = coset[pick]
    return w, int(code.g(w))


def encode(i, x_i, config: CodeConfig, seed) -> int:
    return encode_full(i, x_i, config, seed)[1]


def encoder_distribution(i, x_i, config: CodeConfig):
    """Exact encoder-output law: (blocks, probabilities) over w_i."""
    spec = config.problem
    x_sym = np.asarray(x_i, dtype=np.int64)
    if i in spec.lossless:
        return x_sym[None, :], np.ones(1)
    ctx = _encoder_ctx(config, i)
    coset = ctx["coset"]
    if coset is None or len(coset) == 0:
        raise EmptySupportError("empty constraint preimage")
    weights = _coset_weights(ctx["log_ch"], x_sym, coset)
    total = weights.sum()
    if total <= 0:
        raise EmptySupportError("channel law puts no mass on the constraint coset")
    keep = weights > 0
    return coset[keep], weights[keep] / total


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

def _posterior_letter_table(config: CodeConfig) -> np.ndarray:
    """P(w_all | y) per letter, flattened over the combined description
    alphabet in encoder order (C-order)."""
    key = "letter_posterior"
    if key not in config._ctx:
        spec = config.problem
        t = np.moveaxis(spec.letter_joint, -1, 0)  # (y, x_1, ..., x_k)
        for i in spec.encoders:
            ch = np.eye(spec.x_alphabets[i]) if i in spec.lossless \
                else spec.test_channels[i]
            t = np.tensordot(t, ch, axes=([1], [0]))
        flat = t.reshape(spec.y_alphabet, -1)
        py = flat.sum(axis=1, keepdims=True)
        config._ctx[key] = np.where(py > 0, flat / np.where(py > 0, py, 1.0), 0.0)
        config._ctx["letter_py"] = py.reshape(-1)
    return config._ctx[key]


def _candidate_blocks(config: CodeConfig, i, m) -> np.ndarray:
    """All w_i blocks compatible with (f_i = c_i, g_i = m), shape (count, n)."""
    spec = config.problem
    code = config.codes[i]
    f, g = code.f, code.g
    linear_f = f is None or f.matrix is not None
    if linear_f and g.matrix is not None:
        key = ("dec_solver", i)
        if key not in config._ctx:
            rows_f = f.matrix if f is not None else np.zeros((0, config.n), dtype=np.int64)
            stacked = np.vstack([rows_f, g.matrix])
            config._ctx[key] = AffineSolver(stacked, g.spec.q)
        solver = config._ctx[key]
        tf = index_to_symbols(code.c, f.spec.q, f.spec.rows) if f is not None \
            else np.zeros(0, dtype=np.int64)
        tg = index_to_symbols(int(m), g.spec.q, g.spec.rows)
        enum = solver.enumerate(np.concatenate([tf, tg]))
        if enum is None:
            return np.zeros((0, config.n), dtype=np.int64)
        return enum
    w_dom = spec.w_alphabet(i) ** config.n
    if w_dom > CRNG_STATE_GUARD:
        raise StateSpaceError("decoder enumeration exceeds the guard")
    blocks = _domain_blocks(spec.w_alphabet(i), config.n)
    mask = g.hash_all() == int(m)
    if f is not None:
        mask &= f.hash_all() == code.c
    return blocks[mask]


@dataclass
class _CandidateSet:
    syms: dict            # id -> (count, n) symbol arrays, aligned rows
    weights: np.ndarray   # unnormalized posterior weight per row
    block_idx: dict       # id -> (count,) per-encoder block indices
    super_syms: np.ndarray  # (count, n) combined per-letter symbols


def _decoder_candidates(config: CodeConfig, m_by_id, y_sym) -> _CandidateSet:
    spec = config.problem
    per = [_candidate_blocks(config, i, m_by_id[i]) for i in spec.encoders]
    counts = [len(p) for p in per]
    total = int(np.prod(counts)) if counts else 0
    if total == 0:
        return _CandidateSet(syms={}, weights=np.zeros(0), block_idx={},
                             super_syms=np.zeros((0, config.n), dtype=np.int64))
    if total > CRNG_STATE_GUARD:
        raise StateSpaceError(f"{total} decoder candidates exceed the guard")
    grid = np.indices(counts).reshape(len(counts), -1)
    syms = {}
    block_idx = {}
    super_syms = np.zeros((total, config.n), dtype=np.int64)
    for pos, i in enumerate(spec.encoders):
        rows = per[pos][grid[pos]]
        syms[i] = rows
        block_idx[i] = symbols_to_index(rows, spec.w_alphabet(i))
        super_syms = super_syms * spec.w_alphabet(i) + rows
    post = _posterior_letter_table(config)
    log_post = _safe_log(post)
    lw = log_post[y_sym[None, :], super_syms].sum(axis=1)
    top = lw.max()
    weights = np.exp(lw - top) if np.isfinite(top) else np.zeros(total)
    return _CandidateSet(syms=syms, weights=weights, block_idx=block_idx,
                         super_syms=super_syms)


def _result_from_row(config: CodeConfig, cand: _CandidateSet, row: int,
                     y_sym, flagged=False) -> DecodeResult:
    spec = config.problem
    w_hat = {i: cand.syms[i][row] for i in spec.encoders}
    z = {}
    for j in spec.eval_ids():
        z[j] = reproduce(spec, j, w_hat, y_sym)
    return DecodeResult(w_hat=w_hat, z=z, status=OK, flagged=flagged)


def _empty_result() -> DecodeResult:
    return DecodeResult(w_hat={}, z={}, status=DECODER_EMPTY)


def _tie_order(config: CodeConfig, cand: _CandidateSet, rows) -> int:
    """Among tied rows, pick the lexicographically smallest block tuple."""
    spec = config.problem
    keys = sorted(rows, key=lambda r: tuple(int(cand.block_idx[i][r])
                                            for i in spec.encoders))
    return keys[0]


def decode_map(m_I, y, config: CodeConfig) -> DecodeResult:
    """Posterior-maximizing decoder over the constraint set; deterministic,
    ties broken toward the smallest block tuple."""
    y_sym = np.asarray(y, dtype=np.int64)
    cand = _decoder_candidates(config, m_I, y_sym)
    if cand.weights.size == 0 or cand.weights.sum() <= 0:
        return _empty_result()
    best = cand.weights.max()
    rows = np.nonzero(cand.weights >= best * (1 - 1e-12))[0]
    return _result_from_row(config, cand, _tie_order(config, cand, rows), y_sym)


def decode_crng(m_I, y, config: CodeConfig, seed) -> DecodeResult:
    """Stochastic decoder: draws from the posterior restricted to the
    constraint set."""
    y_sym = np.asarray(y, dtype=np.int64)
    cand = _decoder_candidates(config, m_I, y_sym)
    total = cand.weights.sum()
    if cand.weights.size == 0 or total <= 0:
        return _empty_result()
    rng = np.random.default_rng(seed)
    row = int(rng.choice(len(cand.weights), p=cand.weights / total))
    return _result_from_row(config, cand, row, y_sym)


def decode_distribution(m_I, y, config: CodeConfig):
    """Exact law of the stochastic decoder's output: aligned per-encoder
    block-index arrays plus the probability vector."""
    y_sym = np.asarray(y, dtype=np.int64)
    cand = _decoder_candidates(config, m_I, y_sym)
    total = cand.weights.sum()
    if cand.weights.size == 0 or total <= 0:
        raise EmptySupportError("empty decoder constraint set")
    return cand.block_idx, cand.weights / total


def _subset_threshold_tables(config: CodeConfig):
    """Per nonempty encoder subset: the per-letter conditional table
    -log2 P(w_subset | w_rest, y) over (y, combined symbol), plus its mean
    (the exact conditional entropy per letter)."""
    key = "typical_tables"
    if key not in config._ctx:
        spec = config.problem
        post = _posterior_letter_table(config)          # (y, A)
        py = config._ctx["letter_py"]
        sizes = [spec.w_alphabet(i) for i in spec.encoders]
        shaped = post.reshape([spec.y_alphabet] + sizes)
        tables = {}
        ids = list(spec.encoders)
        for bits in range(1, 1 << len(ids)):
            subset = frozenset(ids[p] for p in range(len(ids)) if bits >> p & 1)
            sub_axes = tuple(1 + p for p in range(len(ids)) if ids[p] in subset)
            marg = shaped.sum(axis=sub_axes, keepdims=True)
            with np.errstate(divide="ignore", invalid="ignore"):
                cond = np.where(marg > 0, shaped / np.where(marg > 0, marg, 1.0), 0.0)
                surml = np.where(cond > 0, -np.log2(np.where(cond > 0, cond, 1.0)),
                                 np.inf)
            flat = np.broadcast_to(surml, shaped.shape).reshape(spec.y_alphabet, -1)
            finite = np.where(np.isfinite(flat), flat, 0.0)
            entropy = float((py[:, None] * post * finite).sum())
            tables[subset] = (flat, entropy)
        config._ctx[key] = tables
    return config._ctx[key]


def decode_typical(m_I, y, config: CodeConfig, epsilon: float) -> DecodeResult:
    """Typical-set decoder: the first (block-tuple order) candidate whose
    empirical conditional surprisals all sit within epsilon of the exact
    conditional entropies.  An empty intersection yields the first candidate
    overall, flagged."""
    y_sym = np.asarray(y, dtype=np.int64)
    cand = _decoder_candidates(config, m_I, y_sym)
    if cand.weights.size == 0:
        return _empty_result()
    tables = _subset_threshold_tables(config)
    mask = np.ones(len(cand.weights), dtype=bool)
    for flat, entropy in tables.values():
        vals = flat[y_sym[None, :], cand.super_syms]
        finite_rows = np.isfinite(vals).all(axis=1)
        rate = np.where(np.isfinite(vals), vals, 0.0).sum(axis=1) / config.n
        mask &= finite_rows & (rate <= entropy + epsilon)
    rows = np.nonzero(mask)[0]
    if rows.size:
        return _result_from_row(config, cand, _tie_order(config, cand, rows), y_sym)
    first = _tie_order(config, cand, np.arange(len(cand.weights)))
    return _result_from_row(config, cand, first, y_sym, flagged=True)


# ---------------------------------------------------------------------------
# Error evaluation
# ---------------------------------------------------------------------------

def _judge(spec: ProblemSpec, x_syms, y_sym, result: DecodeResult, delta,
           trial=0) -> TrialOutcome:
    if not result.ok:
        return TrialOutcome(trial=trial, status=result.status, distortions={},
                            mismatches={}, failure=True)
    distortions = {}
    mismatches = {}
    failure = False
    for j in spec.eval_ids():
        d = block_distortion(spec, j, x_syms, y_sym, result.z[j])
        distortions[j] = d
        level = 0.0 if j in spec.lossless else float(spec.distortion_levels[j])
        bad = d > level + delta
        if j in spec.lossless:
            mismatches[j] = bool(d > 0)
        failure = failure or bad
    return TrialOutcome(trial=trial, status=OK, distortions=distortions,
                        mismatches=mismatches, failure=bool(failure))


def _run_decoder(decoder, m_by_id, y_sym, config, seed, epsilon):
    if decoder == "map":
        return decode_map(m_by_id, y_sym, config)
    if decoder == "crng":
        return decode_crng(m_by_id, y_sym, config, seed)
    if decoder == "typical":
        return decode_typical(m_by_id, y_sym, config, epsilon)
    raise ValueError(f"unknown decoder {decoder!r}")


def run_trial(config: CodeConfig, spec: ProblemSpec, delta, master_seed, trial,
              decoder="crng", epsilon=0.1) -> TrialOutcome:
    """One end-to-end draw: source, encoders, decoder, judgment."""
    sample = sample_block(spec, n=config.n, count=1,
                          seed=child_seed(master_seed, 0, trial))[0]
    x_syms = {i: sample.symbols[f"x_{i}"] for i in spec.encoders}
    y_sym = sample.symbols["y"]
    m_by_id = {}
    for pos, i in enumerate(spec.encoders):
        try:
            _, m_by_id[i] = encode_full(i, x_syms[i], config,
                                        child_seed(master_seed, 10 + pos, trial))
        except EmptySupportError:
            return TrialOutcome(trial=trial, status=ENCODER_ERROR,
                                distortions={}, mismatches={}, failure=True)
    result = _run_decoder(decoder, m_by_id, y_sym, config,
                          child_seed(master_seed, 99, trial), epsilon)
    return _judge(spec, x_syms, y_sym, result, delta, trial=trial)


def mc_trials(config: CodeConfig, spec: ProblemSpec, delta, trials, seed,
              decoder="crng", epsilon=0.1) -> list:
    return [run_trial(config, spec, delta, seed, t, decoder, epsilon)
            for t in range(trials)]


def mc_error(config: CodeConfig, spec: ProblemSpec, delta, trials, seed,
             decoder="crng", epsilon=0.1):
    """Empirical failure frequency and its 95% binomial half-width."""
    if trials < 100:
        raise ValueError("need at least 100 trials")
    outcomes = mc_trials(config, spec, delta, trials, seed, decoder, epsilon)
    fails = sum(o.failure for o in outcomes)
    p = fails / trials
    half = 1.96 * math.sqrt(p * (1 - p) / trials)
    return p, half


def exact_error(config: CodeConfig, spec: ProblemSpec, delta,
                decoder="crng", epsilon=0.1) -> float:
    """Exact failure probability by full enumeration of sources, encoder
    randomness, and (for the stochastic decoder) decoder randomness."""
    n = config.n
    src_states = spec.y_alphabet ** n
    for i in spec.encoders:
        src_states *= spec.x_alphabets[i] ** n
    if src_states > EXACT_SOURCE_GUARD:
        raise StateSpaceError(f"{src_states} source states exceed the "
                              "exact-evaluation guard")
    joint = memoryless_extend(spec, n)
    probs = joint.probs.reshape(-1)
    shape = joint.probs.shape
    decode_cache = {}
    total_error = 0.0
    for flat_idx in np.nonzero(probs)[0]:
        p_src = probs[flat_idx]
        multi = np.unravel_index(flat_idx, shape)
        x_syms = {i: index_to_symbols(int(multi[k]), spec.x_alphabets[i], n)
                  for k, i in enumerate(spec.encoders)}
        y_sym = index_to_symbols(int(multi[-1]), spec.y_alphabet, n)
        # Exact encoder mixture: per-encoder constrained laws are independent
        # given the sources, so walk their product support.
        per_enc = []
        enc_failed = False
        for i in spec.encoders:
            try:
                blocks, qs = encoder_distribution(i, x_syms[i], config)
            except EmptySupportError:
                enc_failed = True
                break
            per_enc.append((i, blocks, qs))
        if enc_failed:
            total_error += p_src
            continue
        counts = [len(b) for _, b, _ in per_enc]
        grid = np.indices(counts).reshape(len(counts), -1)
        for col in range(grid.shape[1]):
            q = p_src
            m_by_id = {}
            for pos, (i, blocks, qs) in enumerate(per_enc):
                row = grid[pos, col]
                q *= qs[row]
                m_by_id[i] = int(config.codes[i].g(blocks[row]))
            if q <= 0:
                continue
            key = (tuple(sorted(m_by_id.items())), int(multi[-1]))
            if key not in decode_cache:
                decode_cache[key] = _exact_decode_branches(
                    config, spec, m_by_id, y_sym, decoder, epsilon)
            total_error += q * _branch_failure(spec, decode_cache[key],
                                               x_syms, y_sym, delta)
    return float(min(total_error, 1.0))


def _exact_decode_branches(config, spec, m_by_id, y_sym, decoder, epsilon):
    """Decoder output law for one (m_I, y): list of (probability, result)."""
    if decoder == "crng":
        y = np.asarray(y_sym)
        cand = _decoder_candidates(config, m_by_id, y)
        total = cand.weights.sum()
        if cand.weights.size == 0 or total <= 0:
            return [(1.0, _empty_result())]
        branches = []
        for row in np.nonzero(cand.weights)[0]:
            branches.append((cand.weights[row] / total,
                             _result_from_row(config, cand, int(row), y)))
        return branches
    result = _run_decoder(decoder, m_by_id, y_sym, config, 0, epsilon)
    return [(1.0, result)]


def _branch_failure(spec, branches, x_syms, y_sym, delta) -> float:
    prob = 0.0
    for q, result in branches:
        if _judge(spec, x_syms, y_sym, result, delta).failure:
            prob += q
    return prob


# ---------------------------------------------------------------------------
# Decision-theoretic and algebraic lemma checks
# ---------------------------------------------------------------------------

def stochastic_decision_gap(joint_uv: BlockDistribution):
    """Error of the posterior-sampling guess versus the optimal guess of U
    from V; their ratio is bounded by 2.

    The first variable of the joint plays U, the second plays V.
    """
    if len(joint_uv.names) != 2:
        raise ValueError("need a bivariate joint")
    p = joint_uv.probs
    pv = p.sum(axis=0)
    with np.errstate(invalid="ignore"):
        cond = np.where(pv > 0, p / np.where(pv > 0, pv, 1.0), 0.0)
    stochastic = float((p * (1.0 - cond)).sum())
    optimal = float((pv * (1.0 - cond.max(axis=0))).sum())
    if optimal <= 0:
        ratio = 1.0 if stochastic <= 1e-15 else math.inf
    else:
        ratio = stochastic / optimal
    return stochastic, optimal, ratio


def telescoping_residuals(theta_sequence):
    """Exact residual of the product-difference expansion and the violation
    of its triangle-inequality form for nonnegative sequences."""
    theta = [float(t) for t in theta_sequence]
    if not theta:
        raise ValueError("need at least one term")
    prod = math.prod(theta)
    acc = 0.0
    bound = 0.0
    for k in range(len(theta)):
        tail = math.prod(theta[k + 1:])
        acc += (theta[k] - 1.0) * tail
        bound += abs(theta[k] - 1.0) * tail
    identity_residual = abs(prod - 1.0 - acc)
    violation = 0.0
    if all(t >= 0 for t in theta):
        violation = max(0.0, abs(prod - 1.0) - bound - 1e-15)
    return identity_residual, violation


def telescoping_identity_check(theta_sequence) -> float:
    residual, violation = telescoping_residuals(theta_sequence)
    return max(residual, violation)
