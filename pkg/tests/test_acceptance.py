"""Acceptance gates for the whole system, one test per criterion.

Each test prints a single `ACCEPT <criterion>: PASS|FAIL <detail>` line
(visible with `pytest -s`, or in the captured-output block on failure)
and enforces its stated tolerance and runtime budget.  The directional
fixture constants were frozen after calibration runs; their rationale
lives outside the repository in the project notes.
"""

import math
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from fitpick.agent import (
    EpsilonSchedule,
    QNetwork,
    QPolicy,
    RandomPolicy,
    Transition,
    run_episode,
    td_gradients,
    td_loss,
    train_dqn,
    DqnConfig,
)
from fitpick.agent.episode import (
    BASELINE_FEEDBACK,
    EpisodeLog,
    EpisodeRunner,
    EpisodeStep,
)
from fitpick.baselines import (
    LstmRecommender,
    TeachingSample,
    no_exploration_train,
    sequence_gradients,
    sequence_loss,
)
from fitpick.data import Garment, OutfitQuadruple, SyntheticWorld, generate_synthetic, split
from fitpick.data.manifest import load_manifest
from fitpick.evaluation import EpisodeEval, aggregate, evaluate_policy
from fitpick.gpbpr import (
    GpbprConfig,
    GpbprModel,
    ScoreNormalizer,
    bpr_gradients,
    bpr_loss,
    fit_normalizer,
    load_proxy,
    ranking_accuracy,
    train_bpr,
)
from fitpick.nn import check_gradients
from fitpick.preprocess import (
    Autoencoder,
    AutoencoderConfig,
    fit_clusters,
    load_clusters,
    reconstruction_gradients,
    reconstruction_loss,
    train_autoencoder,
)
from fitpick.service import Bundle, ServiceConfig, create_app


def verdict(name: str, ok: bool, detail: str) -> bool:
    print(f"ACCEPT {name}: {'PASS' if ok else 'FAIL'} — {detail}")
    return ok


def test_accept_epsilon_schedule_exactness():
    """ε(0)=0.9, ε(200)=0.25+0.65/e, ε(∞)→0.25 with library defaults."""
    t0 = time.monotonic()
    schedule = EpsilonSchedule()
    checks = [
        abs(schedule.value(0) - 0.9) <= 1e-9,
        abs(schedule.value(200) - (0.25 + 0.65 / math.e)) <= 1e-9,
        abs(schedule.value(10**6) - 0.25) < 1e-6,
    ]
    elapsed = time.monotonic() - t0
    ok = all(checks) and elapsed < 1.0
    assert verdict(
        "epsilon-schedule",
        ok,
        f"ε(0)={schedule.value(0)!r} ε(200)={schedule.value(200)!r} "
        f"ε(1e6)={schedule.value(10**6)!r} in {elapsed:.3f}s",
    )


def test_accept_gradient_fidelity():
    """All four trainable components pass central finite differences at 8-d."""
    t0 = time.monotonic()
    errors = {}

    rng = np.random.default_rng(14)
    auto = Autoencoder.build(8, AutoencoderConfig(latent_dim=3, hidden_dims=(5,), seed=14))
    batch = rng.standard_normal((4, 8)) + 0.1
    _, grads = reconstruction_gradients(auto, batch)
    errors["autoencoder"] = check_gradients(
        lambda: reconstruction_loss(auto, batch), auto.parameters(), grads
    )

    rng = np.random.default_rng(34)
    proxy_config = GpbprConfig(
        embed_dim=3, mf_dim=2, hidden_dims=(4,), phi=0.6, eta=0.4, mu=0.5,
        weight_decay=0.01, seed=34,
    )
    users, bottoms = ["u0", "u1"], ["b0", "b1", "b2"]
    proxy = GpbprModel(proxy_config, feature_dim=8, context_dim=8, users=users, bottoms=bottoms)
    garments = {}
    for tid in ("t0", "t1"):
        garments[tid] = Garment(
            id=tid, category="top",
            feature=rng.standard_normal(8) + 0.2,
            context_feature=rng.standard_normal(8) + 0.2,
        )
    for bid in bottoms:
        garments[bid] = Garment(
            id=bid, category="bottom",
            feature=rng.standard_normal(8) + 0.2,
            context_feature=rng.standard_normal(8) + 0.2,
        )
    quads = [
        OutfitQuadruple(user="u0", top="t0", pos="b0", neg="b1"),
        OutfitQuadruple(user="u1", top="t1", pos="b2", neg="b0"),
        OutfitQuadruple(user="u0", top="t1", pos="b1", neg="b2"),
    ]
    _, grads = bpr_gradients(proxy, quads, garments)
    errors["gpbpr"] = check_gradients(
        lambda: bpr_loss(proxy, quads, garments), proxy.parameters(), grads
    )

    rng = np.random.default_rng(33)
    qnet = QNetwork.build(
        feature_dim=8, candidates=[f"b{i}" for i in range(5)], hidden_dims=(6,),
        gamma=0.9, schedule=EpsilonSchedule(), rng=rng,
    )
    target = qnet.clone_mlp()
    target_rng = np.random.default_rng(33 + 1000)
    for layer in target.layers:
        layer.weights += 0.05 * target_rng.standard_normal(layer.weights.shape)
    transitions = []
    for i in range(6):
        avail = np.ones(5, dtype=bool)
        avail[rng.integers(5)] = False
        transitions.append(
            Transition(
                state=rng.standard_normal(8) + 0.1,
                action=int(rng.integers(5)),
                reward=float(rng.random() - 0.5),
                next_state=rng.standard_normal(8) + 0.1,
                next_available=avail,
                done=bool(i == 5),
            )
        )
    _, grads = td_gradients(qnet.mlp, target, transitions, gamma=0.9)
    errors["q-td"] = check_gradients(
        lambda: td_loss(qnet.mlp, target, transitions, gamma=0.9),
        qnet.mlp.parameters(),
        grads,
    )

    rng = np.random.default_rng(19)
    lstm = LstmRecommender.build(8, ["a", "b", "c"], rng)
    sample = TeachingSample(
        top_feature=rng.standard_normal(8), target=1, teacher_feedback=0.7
    )
    _, grads = sequence_gradients(lstm, sample, unroll=4)
    errors["lstm"] = check_gradients(
        lambda: sequence_loss(lstm, sample, unroll=4), lstm.parameters(), grads
    )

    elapsed = time.monotonic() - t0
    ok = all(err < 1e-4 for err in errors.values()) and elapsed < 30.0
    detail = " ".join(f"{name}={err:.2e}" for name, err in errors.items())
    assert verdict("gradient-fidelity", ok, f"{detail} in {elapsed:.1f}s")


def test_accept_episode_identities():
    """State equals f_t + Σ p·f_b exactly; rewards telescope exactly;
    no bottom repeats — over 1000 random episodes."""
    t0 = time.monotonic()
    rng = np.random.default_rng(77)
    garments = {"t0": Garment(id="t0", category="top", feature=rng.standard_normal(6))}
    for i in range(30):
        garments[f"b{i:02d}"] = Garment(
            id=f"b{i:02d}", category="bottom", feature=rng.standard_normal(6)
        )
    candidates = sorted(g for g in garments if g.startswith("b"))

    state_ok = telescope_ok = norepeat_ok = True
    for _ in range(1000):
        runner = EpisodeRunner(
            RandomPolicy(), "u", garments["t0"], garments, candidates, n_steps=10
        )
        while not runner.done:
            runner.next_action(rng)
            runner.apply_feedback(float(rng.random()))
        log = runner.log
        reference = garments["t0"].feature.copy()
        for step in log.steps:
            reference = reference + step.feedback * garments[step.bottom].feature
        state_ok &= bool(np.array_equal(runner.state, reference))
        telescope_ok &= (
            log.episode_return() == log.final_feedback() - BASELINE_FEEDBACK
        )
        norepeat_ok &= len(set(log.bottoms())) == len(log.steps) == 10

    elapsed = time.monotonic() - t0
    ok = state_ok and telescope_ok and norepeat_ok and elapsed < 10.0
    assert verdict(
        "episode-identities",
        ok,
        f"state={state_ok} telescoping={telescope_ok} no-repeat={norepeat_ok} "
        f"over 1000 episodes in {elapsed:.1f}s",
    )


def brute_force_hit_rate(evals: list[EpisodeEval], t: int, against: str) -> float:
    hits = 0
    for ev in evals:
        reference = ev.neg_score if against == "negative" else ev.pos_score
        best = None
        for step in ev.log.steps[:t]:
            if best is None or step.raw_score > best:
                best = step.raw_score
        if best is not None and best > reference:
            hits += 1
    return hits / len(evals)


def test_accept_metric_oracle_equivalence():
    """HN/HP/@T over 500 random logs equal a from-definition reference
    exactly, and the @T series are monotone."""
    t0 = time.monotonic()
    rng = np.random.default_rng(404)
    evals = []
    for _ in range(500):
        n = int(rng.integers(1, 11))
        steps = [
            EpisodeStep(
                step=i,
                action=i,
                bottom=f"b{rng.integers(40):02d}",
                feedback=float(rng.random()),
                reward=0.0,
                raw_score=float(rng.normal()),
            )
            for i in range(n)
        ]
        evals.append(
            EpisodeEval(
                log=EpisodeLog(user="u", top="t", steps=steps),
                pos_score=float(rng.normal()),
                neg_score=float(rng.normal()),
            )
        )

    report = aggregate("probe", evals)
    n_steps = report.n_steps
    exact = (
        report.hit_negative == brute_force_hit_rate(evals, n_steps, "negative")
        and report.hit_positive == brute_force_hit_rate(evals, n_steps, "positive")
        and report.hit_negative_at
        == [brute_force_hit_rate(evals, t, "negative") for t in range(1, n_steps + 1)]
        and report.hit_positive_at
        == [brute_force_hit_rate(evals, t, "positive") for t in range(1, n_steps + 1)]
    )
    monotone = all(
        series == sorted(series)
        for series in (report.hit_negative_at, report.hit_positive_at)
    )
    elapsed = time.monotonic() - t0
    ok = exact and monotone and elapsed < 10.0
    assert verdict(
        "metric-oracle",
        ok,
        f"exact={exact} monotone={monotone} over 500 logs in {elapsed:.1f}s",
    )


def test_accept_proxy_sanity():
    """On a noise-free world the trained proxy ranks held-out pairs with
    AUC > 0.90 and the normalizer hits its percentile anchors exactly."""
    t0 = time.monotonic()
    seed = 5
    world = SyntheticWorld(seed=seed, noise_level=0.0, style_dim=3, feature_dim=16)
    dataset = generate_synthetic(
        world, n_users=30, n_tops=50, n_bottoms=60, n_quadruples=9000
    )
    dataset = split(dataset, (0.7, 0.15, 0.15), seed)
    config = GpbprConfig(
        embed_dim=24, mf_dim=12, hidden_dims=(24,), phi=1.0, eta=1.0, mu=0.5,
        weight_decay=1e-4, epochs=120, learning_rate=0.05, seed=seed,
    )
    proxy, _ = train_bpr(dataset, config)
    auc = ranking_accuracy(proxy, dataset, "val")

    normalizer = fit_normalizer(proxy, dataset)
    scores = sorted(
        proxy.score(q.user, dataset.garments[q.top], dataset.garments[q.pos])
        for q in dataset.quadruples["val"]
    )
    lo = scores[math.ceil(0.05 * len(scores)) - 1]
    hi = scores[math.ceil(0.95 * len(scores)) - 1]
    anchors = (
        normalizer.lo == lo
        and normalizer.hi == hi
        and normalizer.feedback(lo) == 0.0
        and normalizer.feedback(hi) == 1.0
    )
    elapsed = time.monotonic() - t0
    ok = auc > 0.90 and anchors and elapsed < 300.0
    assert verdict(
        "proxy-sanity", ok, f"val-auc={auc:.3f} anchors={anchors} in {elapsed:.1f}s"
    )


DIRECTIONAL_SEEDS = (7, 11, 23)
DIRECTIONAL = dict(
    users=10, tops=30, bottoms=120, quadruples=6000,
    feature_dim=24, style_dim=3,
    latent_dim=6, autoencoder_epochs=30, k=60,
    embed_dim=24, mf_dim=12, proxy_hidden=(24,), proxy_weight_decay=1e-4,
    mu=0.35, proxy_epochs=120, proxy_lr=0.05,
    hidden_dims=(48, 48), agent_epochs=200, episodes_per_epoch=100,
    epsilon_end=0.05, epsilon_decay=20.0, n_steps=10, episodes=200,
)


def directional_trial(seed: int) -> dict:
    p = DIRECTIONAL
    world = SyntheticWorld(
        seed=seed, noise_level=0.0, style_dim=p["style_dim"], feature_dim=p["feature_dim"]
    )
    dataset = generate_synthetic(
        world, n_users=p["users"], n_tops=p["tops"],
        n_bottoms=p["bottoms"], n_quadruples=p["quadruples"],
    )
    dataset = split(dataset, (0.6, 0.2, 0.2), seed)
    rows = np.stack([dataset.garments[g].feature for g in sorted(dataset.garments)])
    auto = train_autoencoder(
        rows,
        AutoencoderConfig(
            latent_dim=p["latent_dim"], epochs=p["autoencoder_epochs"],
            batch_size=32, seed=seed,
        ),
    )
    codes = {g.id: auto.encode(g.feature) for g in dataset.bottoms()}
    clusters = fit_clusters(codes, k=p["k"], seed=seed)
    candidates = clusters.candidate_set()
    proxy, _ = train_bpr(
        dataset,
        GpbprConfig(
            embed_dim=p["embed_dim"], mf_dim=p["mf_dim"],
            hidden_dims=p["proxy_hidden"], weight_decay=p["proxy_weight_decay"],
            phi=1.0, eta=1.0, mu=p["mu"], epochs=p["proxy_epochs"],
            learning_rate=p["proxy_lr"], seed=seed,
        ),
    )
    normalizer = fit_normalizer(proxy, dataset)
    config = DqnConfig(
        hidden_dims=p["hidden_dims"], epochs=p["agent_epochs"],
        episodes_per_epoch=p["episodes_per_epoch"], n_steps=p["n_steps"],
        seed=seed, schedule=EpsilonSchedule(0.9, p["epsilon_end"], p["epsilon_decay"]),
    )
    rl, _ = train_dqn(dataset, proxy.score, normalizer, candidates, config)
    noexp, _ = no_exploration_train(dataset, proxy.score, normalizer, candidates, config)

    out = {}
    for name, policy in (
        ("rl", QPolicy(rl, 0.0)),
        ("noexp", QPolicy(noexp, 0.0)),
        ("random", RandomPolicy()),
    ):
        report, evals = evaluate_policy(
            policy, name, dataset, proxy.score, normalizer, candidates,
            split="test", n_steps=p["n_steps"], episodes=p["episodes"],
            rng=np.random.default_rng(seed),
        )
        out[name] = dict(
            hp=report.hit_positive,
            distinct=report.distinct_bottoms,
            step1=float(np.mean([ev.log.steps[0].feedback for ev in evals])),
            step_last=float(np.mean([ev.log.steps[-1].feedback for ev in evals])),
        )
    return out


def test_accept_directional_reproduction():
    """Seeded desk-scale reproduction of the headline behavioral claims:
    (a) within-episode improvement ≥ 0.05, (b) HP ordering
    rl ≥ no-exploration ≥ random with rl − random ≥ 0.05,
    (c) distinct-bottoms rl ≥ 3× no-exploration; each on ≥ 2 of 3 seeds."""
    t0 = time.monotonic()
    a_hits, b_hits, c_hits, details = [], [], [], []
    for seed in DIRECTIONAL_SEEDS:
        trial = directional_trial(seed)
        rise = trial["rl"]["step_last"] - trial["rl"]["step1"]
        a = rise >= 0.05
        b = (
            trial["rl"]["hp"] >= trial["noexp"]["hp"] >= trial["random"]["hp"]
            and trial["rl"]["hp"] - trial["random"]["hp"] >= 0.05
        )
        c = trial["rl"]["distinct"] >= 3 * trial["noexp"]["distinct"]
        a_hits.append(a)
        b_hits.append(b)
        c_hits.append(c)
        details.append(
            f"seed {seed}: rise={rise:+.3f} "
            f"hp rl/noexp/random={trial['rl']['hp']:.3f}/{trial['noexp']['hp']:.3f}"
            f"/{trial['random']['hp']:.3f} "
            f"distinct rl/noexp={trial['rl']['distinct']}/{trial['noexp']['distinct']}"
        )
    elapsed = time.monotonic() - t0
    ok = (
        sum(a_hits) >= 2
        and sum(b_hits) >= 2
        and sum(c_hits) >= 2
        and elapsed < 1800.0
    )
    assert verdict(
        "directional",
        ok,
        f"improvement {sum(a_hits)}/3, ordering {sum(b_hits)}/3, "
        f"diversity-ratio {sum(c_hits)}/3 in {elapsed:.0f}s; " + "; ".join(details),
    )


def test_accept_service_equivalence(workspace):
    """A proxy-mode HTTP session reproduces the offline episode log
    bit-for-bit, and interleaved sessions stay isolated."""
    t0 = time.monotonic()
    paths = workspace["paths"]
    n_steps = workspace["config"]["agent"]["n_steps"]
    service = ServiceConfig(
        dataset=str(paths["data"]),
        proxy=str(paths["proxy"]),
        clusters=str(paths["prep"]),
        agent=str(paths["qnet"]),
        n_steps=n_steps,
    )
    bundle = Bundle.load(service)
    client = TestClient(create_app(bundle, service))

    quads = bundle.dataset.quadruples["test"]
    user, top = quads[0].user, quads[0].top

    dataset = load_manifest(paths["data"])
    proxy, normalizer = load_proxy(paths["proxy"])
    clusters = load_clusters(paths["prep"])
    qnet = QNetwork.load(paths["qnet"])
    offline = run_episode(
        QPolicy(qnet, epsilon=0.0),
        user,
        dataset.garments[top],
        garments=dataset.garments,
        candidates=clusters.candidate_set(),
        scorer=proxy.score,
        normalizer=normalizer,
        n_steps=n_steps,
    )

    def drive(session_user, session_top):
        start = client.post(
            "/sessions", json={"top_id": session_top, "mode": "proxy", "user_tag": session_user}
        )
        assert start.status_code == 201
        sid = start.json()["session_id"]
        done = False
        while not done:
            done = client.post(f"/sessions/{sid}/feedback", json={}).json()["done"]
        return sid

    sid = drive(user, top)
    history = client.get(f"/sessions/{sid}").json()["history"]
    bitforbit = len(history) == len(offline.steps) and all(
        http["bottom"]["id"] == ref.bottom
        and http["score"] == ref.feedback
        and http["raw_score"] == ref.raw_score
        and http["reward"] == ref.reward
        for http, ref in zip(history, offline.steps)
    )

    pair_b = next((q.user, q.top) for q in quads if (q.user, q.top) != (user, top))
    solo = {}
    for name, (u, t) in (("a", (user, top)), ("b", pair_b)):
        sid_solo = drive(u, t)
        solo[name] = client.get(f"/sessions/{sid_solo}").json()["history"]

    sid_a = client.post(
        "/sessions", json={"top_id": top, "mode": "proxy", "user_tag": user}
    ).json()["session_id"]
    sid_b = client.post(
        "/sessions", json={"top_id": pair_b[1], "mode": "proxy", "user_tag": pair_b[0]}
    ).json()["session_id"]
    for _ in range(n_steps):
        client.post(f"/sessions/{sid_a}/feedback", json={})
        client.post(f"/sessions/{sid_b}/feedback", json={})
    isolated = (
        client.get(f"/sessions/{sid_a}").json()["history"] == solo["a"]
        and client.get(f"/sessions/{sid_b}").json()["history"] == solo["b"]
    )

    elapsed = time.monotonic() - t0
    ok = bitforbit and isolated and elapsed < 60.0
    assert verdict(
        "service-equivalence",
        ok,
        f"bit-for-bit={bitforbit} isolation={isolated} in {elapsed:.1f}s",
    )
