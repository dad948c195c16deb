"""Acceptance suite: one test per release criterion, each printing a verdict.

All experiments run the shipped default configuration; every random stream
derives from its master seed, so each criterion is a deterministic check.
Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.
"""

import itertools
import math

import numpy as np
import pytest

from udnsim.campaign import (aggregate_rows, run_campaign, write_results_csv)
from udnsim.deployment import ScnSite, screening_angle
from udnsim.handover import (CandidateSets, EVENT_BLOCKED, EVENT_EXECUTED,
                             EVENT_NONE, EVENT_TRIGGERED, HandoverFsm,
                             select_target, sinr_offset)
from udnsim.ml import (DecisionTreeRouteClassifier,
                       RandomForestRouteClassifier, evaluate)
from udnsim.ml.oracle import OracleRoutePredictor
from udnsim.radio import RadioParams, noise_power_dbm, pathloss_db

ACCEPT_ITERATIONS = 20


def _report(number: int, description: str, passed: bool, detail: str = ""):
    verdict = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[acceptance] criterion {number:2d} {verdict}: {description}{suffix}")
    assert passed, f"criterion {number}: {description}{suffix}"


def test_criterion_01_noise_power():
    value = noise_power_dbm(RadioParams())
    _report(1, "noise power is -97 dBm at the shipped radio parameters",
            abs(value - (-97.0)) <= 1e-9, f"got {value!r}")


def test_criterion_02_pathloss(rng):
    exact = pathloss_db(1000.0) == 128.1
    d1 = rng.uniform(1.0, 10_000.0, size=100_000)
    d2 = rng.uniform(1.0, 10_000.0, size=100_000)
    lo, hi = np.minimum(d1, d2), np.maximum(d1, d2)
    mask = hi > lo
    monotone = bool(np.all(pathloss_db(hi[mask]) > pathloss_db(lo[mask])))
    _report(2, "pathloss_db(1000 m) = 128.1 dB and is monotone over 1e5 pairs",
            exact and monotone)


def test_criterion_03_screening_angle():
    ok = (abs(screening_angle(25.0) - 28.0) <= 1e-9
          and abs(screening_angle(100.0) - 23.0) <= 1e-9)
    _report(3, "screening angle formula hits 28.0 at 25 km/h and 23.0 at 100 km/h", ok)


def test_criterion_04_penalty_guarantee(rng):
    n = 1_000_000
    kj = rng.uniform(-40.0, 40.0, size=n)
    kx = rng.uniform(-40.0, 40.0, size=n)
    best_other = np.maximum(kj, kx)
    # strictly positive leads so every triple fires the penalty path
    ki = best_other + rng.uniform(1e-9, 40.0, size=n)
    penalised = ki - 3.0 * (ki - best_other)
    demoted = bool(np.all(penalised < best_other))

    never_selected = True
    for _ in range(2000):
        serving = ScnSite(0, 0.0, 0.0)
        pred = [ScnSite(i + 1, float(i), 0.0) for i in range(int(rng.integers(1, 4)))]
        unpred = [ScnSite(10 + i, float(i), 5.0) for i in range(int(rng.integers(1, 4)))]
        sinr_of = {s.id: float(rng.uniform(-30, 30)) for s in pred + unpred}
        kx_val = float(rng.uniform(-30, 30))
        cands = CandidateSets(predicted=pred, unpredicted=unpred, serving=serving)
        ki_site = max(unpred, key=lambda s: (sinr_of[s.id], -s.id))
        kj_val = max(sinr_of[s.id] for s in pred)
        target, _ = select_target(cands, sinr_of, kx_val)
        if sinr_of[ki_site.id] > max(kj_val, kx_val) and target.id == ki_site.id:
            never_selected = False
            break
    _report(4, "penalised unpredicted best always demoted below max(kj, kx) "
               "and never selected while the penalty fires",
            demoted and never_selected)


def _fsm_oracle(ttt, pattern):
    events = []
    timer = 0
    blocked = 0
    for c in pattern:
        if blocked > 0:
            blocked -= 1
            events.append(EVENT_BLOCKED)
            continue
        if c:
            timer += 1
            if timer == ttt:
                events.append(EVENT_EXECUTED)
                timer = 0
                blocked = 25
            else:
                events.append(EVENT_TRIGGERED)
        else:
            timer = 0
            events.append(EVENT_NONE)
    return events


def test_criterion_05_fsm_conformance():
    serving = ScnSite(0, 0.0, 0.0)
    target = ScnSite(1, 10.0, 0.0)
    ok = True
    # full-history traces across every condition pattern
    for ttt in (1, 2, 4):
        for length in range(1, 9):
            for pattern in itertools.product([False, True], repeat=length):
                fsm = HandoverFsm(serving_scn=0, ttt=ttt)
                for _ in range(10):
                    fsm.step(serving, -100.0, -6.0)
                events = [fsm.step(target, 0.0 if c else -6.0, -6.0)
                          for c in pattern]
                expected = _fsm_oracle(ttt, pattern)
                ok &= events == expected
                ok &= fsm.ho_times == expected.count(EVENT_EXECUTED)
    # histories shorter than 10 samples never evaluate
    for warmup in range(0, 10):
        fsm = HandoverFsm(serving_scn=0, ttt=1)
        for _ in range(warmup):
            fsm.step(serving, -100.0, -6.0)
        evaluating_at = 10 - warmup
        for k in range(1, evaluating_at):
            ok &= fsm.step(target, 0.0, -6.0) == EVENT_NONE
        ok &= fsm.step(target, 0.0, -6.0) == EVENT_EXECUTED
    # the 25-tic execution window blocks even overwhelming candidates
    fsm = HandoverFsm(serving_scn=0, ttt=1)
    for _ in range(10):
        fsm.step(serving, -100.0, -6.0)
    fsm.step(target, 0.0, -6.0)
    ok &= all(fsm.step(ScnSite(2, 1.0, 1.0), 30.0, -40.0) == EVENT_BLOCKED
              for _ in range(25))
    ok &= fsm.ho_times == 1
    # timer reset on a condition break mid-TTT
    fsm = HandoverFsm(serving_scn=0, ttt=4)
    for _ in range(10):
        fsm.step(serving, -100.0, -6.0)
    for _ in range(3):
        fsm.step(target, 0.0, -6.0)
    fsm.step(target, -6.0, -6.0)
    ok &= fsm.ho_timer == 0 and fsm.ho_times == 0
    _report(5, "trigger machine reproduces the reference trace semantics "
               "across ttt in {1,2,4}, warmups, and execution windows", ok)


def test_criterion_06_classifier_quality(default_config, default_split,
                                         trained_svm, trained_dtc, trained_rfc):
    train, test = default_split
    assert train.n_rows + test.n_rows >= 50_000
    m_svm = evaluate(trained_svm, train, test)
    m_dtc = evaluate(trained_dtc, train, test)
    m_rfc = evaluate(trained_rfc, train, test)
    quality = (m_svm.tess >= 0.90 and m_dtc.tess >= 0.90 and m_rfc.tess >= 0.90)
    memorise = (m_dtc.tss == 1.0 and m_rfc.tss == 1.0)

    ml = default_config.ml
    X, y = train.features(), train.labels()
    dtc_scores, rfc_scores = [], []
    for k in range(10):
        seed = default_config.master_seed ^ (k + 1)
        dtc_k = DecisionTreeRouteClassifier(
            max_depth=ml.dtc_max_depth,
            min_samples_leaf=ml.dtc_min_samples_leaf, seed=seed).fit(X, y)
        rfc_k = RandomForestRouteClassifier(
            n_trees=ml.rfc_n_trees, max_depth=ml.rfc_max_depth,
            min_samples_leaf=ml.rfc_min_samples_leaf,
            feature_subsample=ml.rfc_feature_subsample, seed=seed).fit(X, y)
        probe = test.features()
        labels = test.labels()
        dtc_scores.append(float(np.mean(dtc_k.predict(probe) == labels)))
        rfc_scores.append(float(np.mean(rfc_k.predict(probe) == labels)))
    ensemble_wins = np.mean(rfc_scores) >= np.mean(dtc_scores)
    _report(6, "classifier quality on the regenerated default corpus",
            quality and memorise and ensemble_wins,
            f"tess svm={m_svm.tess:.4f} dtc={m_dtc.tess:.4f} rfc={m_rfc.tess:.4f}, "
            f"tss dtc={m_dtc.tss} rfc={m_rfc.tss}, "
            f"10-seed tess rfc={np.mean(rfc_scores):.4f} vs dtc={np.mean(dtc_scores):.4f}")


def test_criterion_07_forest_vote_equivalence(default_split, trained_dtc,
                                              default_config, trained_rfc):
    train, test = default_split
    probe = test.features()[:1000]
    votes, pred = trained_rfc.vote(probe)
    tallies = np.zeros_like(votes)
    for row in trained_rfc.tree_predictions(probe):
        for i, c in enumerate(row):
            tallies[i, c] += 1
    vote_ok = (np.array_equal(votes, tallies)
               and np.array_equal(pred, tallies.argmax(axis=1)))

    ml = default_config.ml
    degenerate = RandomForestRouteClassifier(
        n_trees=1, bootstrap=False, feature_subsample=None,
        max_depth=ml.dtc_max_depth, min_samples_leaf=ml.dtc_min_samples_leaf,
        seed=default_config.master_seed,
    ).fit(train.features()[:20_000], train.labels()[:20_000])
    single = DecisionTreeRouteClassifier(
        max_depth=ml.dtc_max_depth, min_samples_leaf=ml.dtc_min_samples_leaf,
        seed=default_config.master_seed,
    ).fit(train.features()[:20_000], train.labels()[:20_000])
    degen_ok = np.array_equal(degenerate.predict(probe), single.predict(probe))
    _report(7, "forest vote equals the brute-force tally and the degenerate "
               "forest equals the single tree", vote_ok and degen_ok)


@pytest.fixture(scope="module")
def ttt_trend_rows(default_config):
    return run_campaign(default_config, ttt_values=[1, 2, 4, 8, 12],
                        velocities=[10.0], predictors=["none"],
                        iterations=ACCEPT_ITERATIONS)


def test_criterion_08_ttt_trend(ttt_trend_rows):
    aggs = {a["ttt_tics"]: a["mean_ho_times"]
            for a in aggregate_rows(ttt_trend_rows)}
    means = [aggs[t] for t in (1, 2, 4, 8, 12)]
    non_increasing = all(a >= b for a, b in zip(means, means[1:]))
    collapsed = means[-1] < 0.10 * means[0]
    _report(8, "mean handovers non-increasing over ttt {1,2,4,8,12} at 10 km/h "
               "and below 10% of the ttt=1 level by ttt=12",
            non_increasing and collapsed,
            "means " + ", ".join(f"{m:.1f}" for m in means))


def test_criterion_09_velocity_trend(default_config):
    rows = run_campaign(default_config, ttt_values=[4],
                        velocities=[10.0, 20.0, 30.0, 40.0, 50.0],
                        predictors=["none"], iterations=ACCEPT_ITERATIONS)
    aggs = {a["velocity_kmh"]: a["mean_ho_times"] for a in aggregate_rows(rows)}
    means = [aggs[v] for v in (10.0, 20.0, 30.0, 40.0, 50.0)]
    increasing = all(a < b for a, b in zip(means, means[1:]))
    _report(9, "baseline mean handovers strictly increase across 10..50 km/h",
            increasing, "means " + ", ".join(f"{m:.1f}" for m in means))


def test_criterion_10_reduction_bands(default_config, trained_svm, trained_dtc,
                                      trained_rfc):
    rows = run_campaign(
        default_config, ttt_values=[4], velocities=[30.0],
        predictors=["none", "oracle", "svm", "dtc", "rfc"],
        models={"svm": trained_svm, "dtc": trained_dtc, "rfc": trained_rfc},
        iterations=ACCEPT_ITERATIONS)
    red = {a["predictor"]: a["reduction_vs_none_pct"]
           for a in aggregate_rows(rows) if a["predictor"] != "none"}
    oracle_ok = red["oracle"] >= 20.0
    bands_ok = all(5.0 <= red[k] <= 80.0 for k in ("svm", "dtc", "rfc"))
    ordering_ok = red["rfc"] >= red["svm"]
    _report(10, "reduction at 30 km/h ttt=4: oracle >= 20%, trained in [5, 80]%, "
                "rfc >= svm",
            oracle_ok and bands_ok and ordering_ok,
            ", ".join(f"{k}={red[k]:.2f}%" for k in ("oracle", "svm", "dtc", "rfc")))


def test_criterion_11_determinism(default_config, ttt_trend_rows, tmp_path):
    rerun = run_campaign(default_config, ttt_values=[1, 2, 4, 8, 12],
                         velocities=[10.0], predictors=["none"],
                         iterations=ACCEPT_ITERATIONS)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_results_csv(ttt_trend_rows, first)
    write_results_csv(rerun, second)
    _report(11, "rerunning the ttt-trend experiment reproduces the results "
                "file byte for byte",
            first.read_bytes() == second.read_bytes())
