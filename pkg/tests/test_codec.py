import math

import numpy as np
import pytest

from conftest import quantizer_spec
from dsclab.blocks import all_blocks, index_to_symbols, symbols_to_index
from dsclab.codec import (DECODER_EMPTY, OK, CodeConfig, CodePlan,
                          EmptySupportError, EncoderCode, child_seed,
                          crng_sample, decode_crng, decode_distribution,
                          decode_map, decode_typical, draw_code, encode,
                          encode_full, encoder_distribution, exact_error,
                          mc_error, mc_trials, restricted_distribution,
                          run_trial, stochastic_decision_gap,
                          telescoping_identity_check, telescoping_residuals)
from dsclab.hashes import DrawnHash, HashEnsembleSpec, draw
from dsclab.sources import (BlockDistribution, StateSpaceError,
                            marginalize_condition, memoryless_extend)


def uniform_spec(n, rows):
    return HashEnsembleSpec("uniform_linear", alphabet=2, block_length=n,
                            image_size=2 ** rows, q=2)


def binning_spec(n, image):
    return HashEnsembleSpec("random_binning", alphabet=2, block_length=n,
                            image_size=image)


def table_hash(n, image, table):
    return DrawnHash(spec=binning_spec(n, image),
                     table=np.asarray(table, dtype=np.int64))


def lossless_code(spec, n, g, seed=None):
    del seed
    return CodeConfig(problem=spec, n=n,
                      codes={"1": EncoderCode(encoder_id="1", f=None, g=g)})


def posterior_letter(spec):
    """P(x | y) for the single lossless encoder, as a plain table."""
    block = memoryless_extend(spec, 1)
    rows = []
    for y in range(spec.y_alphabet):
        rows.append(marginalize_condition(block, ["x_1"], given={"y": y}).probs)
    return np.stack(rows)   # shape (y, x)


# ---------------------------------------------------------------------------
# Constrained sampling
# ---------------------------------------------------------------------------

def w_law(n, probs):
    return BlockDistribution(names=["w"], alphabets=[2], n=n,
                             probs=np.asarray(probs, dtype=float))


def test_restricted_distribution_unconstrained():
    law = w_law(2, [0.4, 0.3, 0.2, 0.1])
    idx, probs = restricted_distribution(law, [])
    assert np.array_equal(idx, [0, 1, 2, 3])
    assert np.allclose(probs, [0.4, 0.3, 0.2, 0.1])


def test_restricted_distribution_parity_coset():
    """Conditioning on an even parity bit keeps exactly the even blocks,
    renormalized."""
    law = w_law(2, [0.4, 0.3, 0.2, 0.1])
    parity = DrawnHash(spec=uniform_spec(2, 1), matrix=np.array([[1, 1]]))
    idx, probs = restricted_distribution(law, [(parity, 0)])
    assert np.array_equal(idx, [0, 3])        # 00 and 11
    assert np.allclose(probs, [0.8, 0.2])
    idx, probs = restricted_distribution(law, [(parity, 1)])
    assert np.array_equal(idx, [1, 2])
    assert np.allclose(probs, [0.6, 0.4])


def test_restricted_distribution_empty_support():
    law = w_law(2, [0.4, 0.3, 0.2, 0.1])
    dead = table_hash(2, 2, [0, 0, 0, 0])
    with pytest.raises(EmptySupportError):
        restricted_distribution(law, [(dead, 1)])
    with pytest.raises(EmptySupportError):
        restricted_distribution(law, [(dead, 5)])   # outside the image


def test_restricted_distribution_needs_single_variable():
    blk = memoryless_extend((np.full((2, 2), 0.25), ["a", "b"]), 1)
    with pytest.raises(ValueError):
        restricted_distribution(blk, [])


def test_crng_sample_empirical_law():
    law = w_law(2, [0.4, 0.3, 0.2, 0.1])
    parity = DrawnHash(spec=uniform_spec(2, 1), matrix=np.array([[1, 1]]))
    draws = crng_sample(law, [(parity, 0)], seed=7, count=20000)
    assert draws.shape == (20000, 2)
    counts = np.bincount([symbols_to_index(d, 2) for d in draws], minlength=4)
    freq = counts / counts.sum()
    assert freq[1] == 0 and freq[2] == 0
    assert abs(freq[0] - 0.8) < 0.01
    single = crng_sample(law, [(parity, 0)], seed=7)
    assert single.shape == (2,)


def test_crng_sample_deterministic():
    law = w_law(2, [0.25] * 4)
    a = crng_sample(law, [], seed=3, count=50)
    b = crng_sample(law, [], seed=3, count=50)
    c = crng_sample(law, [], seed=4, count=50)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


# ---------------------------------------------------------------------------
# Seed tree
# ---------------------------------------------------------------------------

def test_child_seed_deterministic_and_distinct():
    s1 = child_seed(5, 1, 2)
    s2 = child_seed(5, 1, 2)
    s3 = child_seed(5, 1, 3)
    assert s1.generate_state(4).tolist() == s2.generate_state(4).tolist()
    assert s1.generate_state(4).tolist() != s3.generate_state(4).tolist()


def test_child_seed_composes():
    base = child_seed(9, 4)
    derived = child_seed(base, 7)
    again = child_seed(child_seed(9, 4), 7)
    assert derived.generate_state(4).tolist() == again.generate_state(4).tolist()
    assert derived.generate_state(4).tolist() != base.generate_state(4).tolist()


# ---------------------------------------------------------------------------
# Code drawing and validation
# ---------------------------------------------------------------------------

def test_draw_code_lossless(sw_side):
    plans = {"1": CodePlan(f_spec=None, g_spec=uniform_spec(4, 3))}
    code = draw_code(sw_side, 4, plans, seed=0)
    assert code.codes["1"].f is None
    assert code.codes["1"].c == 0
    assert code.r("1") == 0.0
    assert code.R("1") == 0.75
    assert code.rates() == {"1": (0.0, 0.75)}


def test_draw_code_deterministic(quantizer):
    plans = {"1": CodePlan(f_spec=uniform_spec(3, 1), g_spec=uniform_spec(3, 2))}
    a = draw_code(quantizer, 3, plans, seed=5)
    b = draw_code(quantizer, 3, plans, seed=5)
    assert np.array_equal(a.codes["1"].f.matrix, b.codes["1"].f.matrix)
    assert np.array_equal(a.codes["1"].g.matrix, b.codes["1"].g.matrix)
    assert a.codes["1"].c == b.codes["1"].c


def test_code_config_rejects_lossless_constraint(sw_side):
    f = draw(uniform_spec(2, 1), 0)
    g = draw(uniform_spec(2, 1), 1)
    with pytest.raises(ValueError):
        CodeConfig(problem=sw_side, n=2,
                   codes={"1": EncoderCode(encoder_id="1", f=f, g=g)})


def test_code_config_rejects_bad_constraint_value(quantizer):
    f = draw(uniform_spec(2, 1), 0)
    g = draw(uniform_spec(2, 1), 1)
    with pytest.raises(ValueError):
        CodeConfig(problem=quantizer, n=2,
                   codes={"1": EncoderCode(encoder_id="1", f=f, g=g, c=2)})


def test_code_config_rejects_length_mismatch(sw_side):
    g = draw(uniform_spec(3, 1), 1)
    with pytest.raises(ValueError):
        CodeConfig(problem=sw_side, n=2,
                   codes={"1": EncoderCode(encoder_id="1", f=None, g=g)})


def test_code_config_needs_every_encoder(sw_pair):
    g = draw(uniform_spec(2, 1), 1)
    with pytest.raises(ValueError):
        CodeConfig(problem=sw_pair, n=2,
                    codes={"1": EncoderCode(encoder_id="1", f=None, g=g)})


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def test_encode_lossless_hashes_source(sw_side):
    g = draw(uniform_spec(4, 2), 3)
    config = lossless_code(sw_side, 4, g)
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = rng.integers(0, 2, size=4)
        w, m = encode_full("1", x, config, seed=0)
        assert np.array_equal(w, x)
        assert m == g(x)
        assert encode("1", x, config, seed=1) == m


def test_encode_coded_respects_constraint(quantizer):
    plans = {"1": CodePlan(f_spec=uniform_spec(4, 2), g_spec=uniform_spec(4, 1))}
    config = draw_code(quantizer, 4, plans, seed=2)
    code = config.codes["1"]
    rng = np.random.default_rng(1)
    for t in range(40):
        x = rng.integers(0, 2, size=4)
        w, m = encode_full("1", x, config, seed=t)
        assert code.f(w) == code.c
        assert m == code.g(w)


def test_encoder_distribution_matches_brute_force(quantizer):
    """Exact encoder law against a direct restriction of the channel
    product to the constraint coset."""
    plans = {"1": CodePlan(f_spec=uniform_spec(4, 1), g_spec=uniform_spec(4, 2))}
    config = draw_code(quantizer, 4, plans, seed=8)
    code = config.codes["1"]
    ch = quantizer.test_channels["1"]
    blocks = all_blocks(2, 4)
    rng = np.random.default_rng(2)
    for _ in range(5):
        x = rng.integers(0, 2, size=4)
        weights = np.array([np.prod([ch[a, b] for a, b in zip(x, w)])
                            if code.f(w) == code.c else 0.0 for w in blocks])
        got_blocks, got_probs = encoder_distribution("1", x, config)
        dense = np.zeros(16)
        for w, p in zip(got_blocks, got_probs):
            dense[symbols_to_index(w, 2)] = p
        assert abs(dense.sum() - 1.0) < 1e-12
        assert np.abs(dense - weights / weights.sum()).max() < 1e-12


def test_encoder_empty_support_raises():
    spec = quantizer_spec(flip=0.0)    # w is forced to equal x
    dead = table_hash(2, 2, [0, 0, 0, 0])
    g = draw(uniform_spec(2, 1), 1)
    config = CodeConfig(problem=spec, n=2,
                        codes={"1": EncoderCode(encoder_id="1", f=dead,
                                                g=g, c=1)})
    with pytest.raises(EmptySupportError):
        encode_full("1", np.array([0, 1]), config, seed=0)


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

def test_decode_map_matches_brute_force(sw_side):
    """Maximum-posterior decoding against exhaustive enumeration over the
    constraint set, for every (bin, side information) pair."""
    n = 3
    g = draw(uniform_spec(n, 2), seed=6)
    config = lossless_code(sw_side, n, g)
    post = posterior_letter(sw_side)
    blocks = all_blocks(2, n)
    for m in range(4):
        for y_idx in range(8):
            y = index_to_symbols(y_idx, 2, n)
            weights = np.array(
                [np.prod([post[b, a] for a, b in zip(w, y)])
                 if g(w) == m else 0.0 for w in blocks])
            result = decode_map({"1": m}, y, config)
            if weights.sum() == 0:
                assert result.status == DECODER_EMPTY
                continue
            assert result.status == OK
            best = int(np.argmax(weights))   # first max = smallest index
            assert symbols_to_index(result.w_hat["1"], 2) == best
            assert np.array_equal(result.z["1"], result.w_hat["1"])


def test_decode_map_tie_breaks_to_smallest_index():
    """A flat posterior leaves every candidate tied, so the decoder must
    return the lexicographically smallest block in the bin."""
    spec = quantizer_spec(flip=0.5)    # posterior over w is uniform
    g = draw(uniform_spec(3, 1), seed=1)
    config = CodeConfig(problem=spec, n=3,
                        codes={"1": EncoderCode(encoder_id="1", f=None, g=g)})
    for m in range(2):
        members = [k for k, w in enumerate(all_blocks(2, 3)) if g(w) == m]
        result = decode_map({"1": m}, np.zeros(3, dtype=int), config)
        assert symbols_to_index(result.w_hat["1"], 2) == min(members)


def test_decode_crng_distribution_matches_brute(sw_side):
    n = 3
    g = draw(uniform_spec(n, 2), seed=6)
    config = lossless_code(sw_side, n, g)
    post = posterior_letter(sw_side)
    blocks = all_blocks(2, n)
    y = np.array([0, 1, 0])
    m = int(g(np.array([0, 1, 0])))
    weights = np.array([np.prod([post[b, a] for a, b in zip(w, y)])
                        if g(w) == m else 0.0 for w in blocks])
    idx_by_id, probs = decode_distribution({"1": m}, y, config)
    dense = np.zeros(8)
    for r, p in zip(idx_by_id["1"], probs):
        dense[int(r)] += p
    assert np.abs(dense - weights / weights.sum()).max() < 1e-12


def test_decode_crng_seeded_and_supported(sw_side):
    n = 3
    g = draw(uniform_spec(n, 2), seed=6)
    config = lossless_code(sw_side, n, g)
    y = np.array([1, 1, 0])
    m = int(g(np.array([1, 1, 0])))
    a = decode_crng({"1": m}, y, config, seed=5)
    b = decode_crng({"1": m}, y, config, seed=5)
    assert np.array_equal(a.w_hat["1"], b.w_hat["1"])
    assert g(a.w_hat["1"]) == m


def test_decode_empty_bin(sw_side):
    # a table bin that no block maps into
    g = table_hash(2, 3, [0, 1, 0, 1])
    config = lossless_code(sw_side, 2, g)
    result = decode_map({"1": 2}, np.zeros(2, dtype=int), config)
    assert result.status == DECODER_EMPTY
    assert not result.ok


def test_decode_typical_flags_atypical_candidate(sw_side):
    g = table_hash(1, 2, [0, 1])    # injective bin map at n=1
    config = lossless_code(sw_side, 1, g)
    y = np.zeros(1, dtype=int)
    # the only candidate has surprisal -log2 P(x=1|y=0), far above H(X|Y)
    tight = decode_typical({"1": 1}, y, config, epsilon=0.1)
    assert tight.flagged
    assert np.array_equal(tight.w_hat["1"], [1])
    loose = decode_typical({"1": 1}, y, config, epsilon=5.0)
    assert not loose.flagged
    assert np.array_equal(loose.w_hat["1"], [1])


def test_decode_typical_prefers_typical_members(sw_side):
    n = 4
    g = table_hash(n, 2, [0] * 8 + [1] * 8)    # bin = leading bit
    config = lossless_code(sw_side, n, g)
    y = np.zeros(n, dtype=int)
    result = decode_typical({"1": 0}, y, config, epsilon=0.1)
    # all-zero agrees with y everywhere: rate -log2(0.9) < H(X|Y) + 0.1
    assert not result.flagged
    assert symbols_to_index(result.w_hat["1"], 2) == 0


# ---------------------------------------------------------------------------
# Exact and sampled error
# ---------------------------------------------------------------------------

def test_exact_error_injective_code_is_zero(sw_side):
    g = table_hash(2, 4, [0, 1, 2, 3])
    config = lossless_code(sw_side, 2, g)
    assert exact_error(config, sw_side, delta=0.0, decoder="map") == 0.0


def test_exact_error_uninformative_bin_closed_form(sw_side):
    """With a single bin the decoder guesses from y alone; the best guess
    per letter is right with probability 0.9, so the exact block error is
    1 - 0.9^n."""
    for n in (1, 2, 3):
        g = table_hash(n, 1, [0] * (2 ** n))
        config = lossless_code(sw_side, n, g)
        err = exact_error(config, sw_side, delta=0.0, decoder="map")
        assert abs(err - (1 - 0.9 ** n)) < 1e-12


def test_exact_error_crng_dominates_map(quantizer):
    plans = {"1": CodePlan(f_spec=uniform_spec(2, 1), g_spec=uniform_spec(2, 1))}
    config = draw_code(quantizer, 2, plans, seed=3)
    e_map = exact_error(config, quantizer, delta=0.05, decoder="map")
    e_crng = exact_error(config, quantizer, delta=0.05, decoder="crng")
    assert 0.0 <= e_map <= e_crng + 1e-12 <= 1.0 + 1e-12


def test_exact_error_guard(sw_side):
    g = draw(uniform_spec(20, 4), 0)
    config = lossless_code(sw_side, 20, g)
    with pytest.raises(StateSpaceError):
        exact_error(config, sw_side, delta=0.0)


def test_mc_error_matches_exact(sw_side):
    n = 3
    g = draw(uniform_spec(n, 2), seed=6)
    config = lossless_code(sw_side, n, g)
    exact = exact_error(config, sw_side, delta=0.0, decoder="map")
    est, half = mc_error(config, sw_side, delta=0.0, trials=1500, seed=17,
                         decoder="map")
    assert abs(est - exact) < 2.5 * half
    est2, _ = mc_error(config, sw_side, delta=0.0, trials=1500, seed=17,
                       decoder="map")
    assert est2 == est


def test_mc_error_minimum_trials(sw_side):
    g = draw(uniform_spec(2, 1), 0)
    config = lossless_code(sw_side, 2, g)
    with pytest.raises(ValueError):
        mc_error(config, sw_side, delta=0.0, trials=50, seed=0)


def test_run_trial_outcomes(sw_side):
    g = draw(uniform_spec(3, 2), seed=6)
    config = lossless_code(sw_side, 3, g)
    outcomes = mc_trials(config, sw_side, 0.0, 60, seed=2, decoder="map")
    assert [o.trial for o in outcomes] == list(range(60))
    for o in outcomes:
        assert o.status == OK
        assert set(o.distortions) == {"1"}
        assert o.failure == (o.distortions["1"] > 0)
        assert o.mismatches["1"] == o.failure


def test_run_trial_lossy_judgment(quantizer):
    plans = {"1": CodePlan(f_spec=uniform_spec(3, 1), g_spec=uniform_spec(3, 2))}
    config = draw_code(quantizer, 3, plans, seed=4)
    out = run_trial(config, quantizer, delta=1.0, master_seed=0, trial=0)
    # delta covers the whole distortion range, so nothing can fail
    assert out.status == OK and not out.failure


# ---------------------------------------------------------------------------
# Decision gap and telescoping identities
# ---------------------------------------------------------------------------

def joint2(rows):
    arr = np.asarray(rows, dtype=float)
    return BlockDistribution(names=["u", "v"], alphabets=list(arr.shape),
                             n=1, probs=arr)


def test_decision_gap_uniform():
    stoch, opt, ratio = stochastic_decision_gap(joint2(np.full((2, 2), 0.25)))
    assert abs(stoch - 0.5) < 1e-12
    assert abs(opt - 0.5) < 1e-12
    assert abs(ratio - 1.0) < 1e-12


def test_decision_gap_deterministic():
    stoch, opt, ratio = stochastic_decision_gap(
        joint2([[0.5, 0.0], [0.0, 0.5]]))
    assert stoch == 0.0 and opt == 0.0 and ratio == 1.0


def test_decision_gap_hand_value():
    stoch, opt, ratio = stochastic_decision_gap(
        joint2([[0.4, 0.2], [0.1, 0.3]]))
    assert abs(stoch - 0.40) < 1e-12
    assert abs(opt - 0.30) < 1e-12
    assert abs(ratio - 4 / 3) < 1e-12


def test_decision_gap_bounded_by_two():
    rng = np.random.default_rng(12)
    for _ in range(40):
        shape = (int(rng.integers(2, 7)), int(rng.integers(2, 7)))
        probs = rng.dirichlet(np.ones(shape[0] * shape[1])).reshape(shape)
        _, _, ratio = stochastic_decision_gap(joint2(probs))
        assert ratio <= 2.0 + 1e-9


def test_decision_gap_needs_two_variables():
    blk = BlockDistribution(names=["u"], alphabets=[2], n=1,
                            probs=np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        stochastic_decision_gap(blk)


def test_telescoping_identity_hand_case():
    residual, violation = telescoping_residuals([2.0, 3.0])
    assert residual < 1e-12 and violation == 0.0


def test_telescoping_identity_random_sequences():
    rng = np.random.default_rng(1)
    for _ in range(200):
        k = int(rng.integers(1, 9))
        theta = rng.uniform(0.0, 1.5, size=k)
        assert telescoping_identity_check(theta) < 1e-12


def test_telescoping_allows_signed_terms():
    residual, violation = telescoping_residuals([-0.5, 2.0, 0.25])
    assert residual < 1e-12
    assert violation == 0.0    # the inequality form only binds nonnegatives


def test_telescoping_empty_sequence():
    with pytest.raises(ValueError):
        telescoping_residuals([])
