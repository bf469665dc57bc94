"""Acceptance criteria, one test per criterion.

Each test carries ``@pytest.mark.acceptance(number, title)``; the terminal
summary (see conftest.py) prints one PASS/FAIL line per criterion.
"""

import io
import math
import random
import time
from ipaddress import IPv4Network

import numpy as np
import pytest

from astaxon.boosting import (
    Model,
    TermRule,
    TrainConfig,
    classify,
    hamming_loss,
    init_distribution,
    load_model,
    save_model,
    select_weak_hypothesis,
    train,
    update_distribution,
)
from astaxon.cli import main
from astaxon.core import AsRecord
from astaxon.eval import accuracy, coverage, cross_validate
from astaxon.ingest import space_attribute, write_dataset
from astaxon.synthetic import generate_corpus
from astaxon.textprep import porter_stem
from oracles import covered_slash24, min_z, random_corpus, random_distribution, random_prefix, rule_z

acceptance = pytest.mark.acceptance


def _manual_boost(S, config):
    """Boosting loop driven from the public pieces, exposing every D_t."""
    D = init_distribution(len(S))
    rounds, zs, dists = [], [], [D]
    for _ in range(config.rounds):
        h, _ = select_weak_hypothesis(D, S, config)
        D, z = update_distribution(D, S, h)
        rounds.append(h)
        zs.append(z)
        dists.append(D)
    return rounds, zs, dists


@acceptance(1, "boosting bound: Hamming loss <= prod Z_t on 50 random corpora, < 30 s")
def test_boosting_bound():
    rng = random.Random(1001)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        S = random_corpus(rng, m=rng.randint(1, 60), vocab=[f"t{j}" for j in range(rng.randint(1, 40))], value_range=rng.choice([3, 20, 500]))
        model = train(S, TrainConfig())
        loss = hamming_loss(model, S)
        bound = math.prod(model.z_values)
        assert loss <= bound, (loss, bound)
        worst = max(worst, loss - bound)
    elapsed = time.perf_counter() - start
    print(f"criterion 1: max(loss - bound) = {worst:.3g}, {elapsed:.2f} s")
    assert elapsed < 30


@acceptance(2, "weak-learner optimality vs brute force within 1e-12 on 100 instances")
def test_weak_learner_optimality():
    rng = random.Random(2002)
    worst = 0.0
    checked = 0
    for i in range(100):
        vocab = [f"w{j}" for j in range(rng.randint(1, 40))]
        S = random_corpus(rng, m=rng.randint(1, 25), vocab=vocab, max_terms=rng.randint(0, 6))
        assert len({t for e in S for t in e.record.description_terms}) <= 40
        # a random distribution, then the distributions reached while boosting
        dists = [np.array(random_distribution(rng, len(S)))]
        dists += _manual_boost(S, TrainConfig(rounds=3))[2][:-1]
        for D in dists:
            rule, z = select_weak_hypothesis(D, S)
            oracle = min_z(D.tolist(), S)
            worst = max(worst, abs(z - oracle), abs(rule_z(D.tolist(), S, rule) - oracle))
            checked += 1
    print(f"criterion 2: {checked} searches, max |Z - Z_oracle| = {worst:.3g}")
    assert worst <= 1e-12


@acceptance(3, "distribution sums to 1 within 1e-9 and stays non-negative after every update")
def test_distribution_normalization():
    rng = random.Random(3003)
    worst = 0.0
    updates = 0
    for _ in range(30):
        S = random_corpus(rng, m=rng.randint(1, 60), value_range=rng.choice([3, 50]))
        config = TrainConfig(rounds=28)
        rounds, zs, dists = _manual_boost(S, config)
        # the manual loop is the library's loop
        assert tuple(rounds) == train(S, config).rounds
        for D in dists[1:]:
            assert (D >= 0).all()
            worst = max(worst, abs(D.sum() - 1.0))
            updates += 1
    print(f"criterion 3: {updates} updates, max |sum D - 1| = {worst:.3g}")
    assert worst <= 1e-9


@acceptance(4, "separable corpus: 100% training accuracy, >= 95% held-out over 20 CV iterations")
def test_separable_corpus(corpus120):
    S = list(corpus120)
    assert len(S) == 120 and len({e.label for e in S}) == 6
    model = train(S, TrainConfig())
    assert accuracy(model, S) == 1.0
    assert coverage(model, S) == 0.0
    res = cross_validate(S, holdout=20, iterations=20, train_sizes=[100], seed=0)
    mean_acc = float(res.accuracy.mean())
    print(f"criterion 4: held-out accuracy {mean_acc:.4f}, coverage {float(res.coverage.mean()):.4f}")
    assert mean_acc >= 0.95
    for acc, cov in zip(res.accuracy[:, 0], res.coverage[:, 0]):
        if acc == 1.0:
            assert cov == 0.0
    assert float(res.coverage.mean()) < 0.1


@acceptance(5, "trend: accuracy non-decreasing, coverage non-increasing in train size (2 SE, 50 iterations)")
def test_trend():
    S = generate_corpus(n=400, seed=1, clean=False)
    sizes = [10, 20, 40, 80, 160, 320]
    res = cross_validate(S, holdout=50, iterations=50, train_sizes=sizes, seed=0, workers=4)
    summary = res.summary()
    for s in summary:
        print(f"criterion 5: size {s.size:>4} acc {s.mean_accuracy:.4f} (se {s.se_accuracy:.4f}) cov {s.mean_coverage:.4f} (se {s.se_coverage:.4f})")
    for a, b in zip(summary, summary[1:]):
        assert b.mean_accuracy >= a.mean_accuracy - 2 * math.hypot(a.se_accuracy, b.se_accuracy)
        assert b.mean_coverage <= a.mean_coverage + 2 * math.hypot(a.se_coverage, b.se_coverage)
    # the curve actually moves
    assert summary[-1].mean_accuracy > summary[0].mean_accuracy
    assert summary[-1].mean_coverage < summary[0].mean_coverage


@acceptance(6, "/24 space equals brute-force enumeration on 200 prefix sets; {10.0.0.0/8} -> 65536")
def test_slash24_oracle():
    assert space_attribute([IPv4Network("10.0.0.0/8")]) == 65536
    rng = random.Random(6006)
    for _ in range(200):
        prefixes = [random_prefix(rng, rng.choice([8, 12, 16]), 32) for _ in range(rng.randint(0, 100))]
        assert space_attribute(prefixes) == len(covered_slash24(prefixes))


@acceptance(7, "stemmer fidelity: univers/exchang/inform and >= 99.9% on the Porter vocabulary")
def test_stemmer_fidelity(data_dir):
    assert porter_stem("university") == "univers"
    assert porter_stem("exchange") == "exchang"
    assert porter_stem("information") == "inform"
    words = (data_dir / "porter_voc.txt").read_text().split()
    stems = (data_dir / "porter_output.txt").read_text().split()
    listed = {ln.split()[0] for ln in (data_dir / "porter_divergences.txt").read_text().splitlines() if ln and not ln.startswith("#")}
    mismatched = {w for w, s in zip(words, stems) if porter_stem(w) != s}
    rate = 1 - len(mismatched) / len(words)
    print(f"criterion 7: {rate:.5f} exact match over {len(words)} words, {len(mismatched)} documented divergences")
    assert rate >= 0.999
    assert mismatched == listed


def _abstain_model():
    # "zero" pins the max score at exactly 0; "neg" pushes everything below 0
    return Model(
        (
            TermRule(("zero",), (0.0, -1.0, -2.0, -0.5, -3.0, -1.5)),
            TermRule(("neg",), (-0.25,) * 6),
            TermRule(("pos",), (-1.0, 5e-324, -1.0, -1.0, -1.0, -1.0)),
        ),
        0.1,
        2,
    )


@acceptance(8, "abstention: all scores <= 0 (including exactly 0) gives ABSTAIN in library and CLI")
def test_abstention_end_to_end(tmp_path, capsys):
    model = _abstain_model()
    cases = {
        1: (("zero",), None),
        2: (("neg",), None),
        3: (("nothing",), None),
        4: ((), None),
        5: (("pos",), "small_isp"),
        6: (("pos", "zero"), None),
    }
    records = {asn: AsRecord(asn, terms) for asn, (terms, _) in cases.items()}
    for asn, (_, expected) in cases.items():
        pred = classify(model, records[asn])
        assert (pred.top_class.token if pred.top_class is not None else None) == expected
    assert max(model.scores(records[1])) == 0.0

    model_path = tmp_path / "model.txt"
    data_path = tmp_path / "data.txt"
    with open(model_path, "w") as fh:
        save_model(model, fh)
    with open(data_path, "w") as fh:
        write_dataset(((records[a], None) for a in sorted(records)), fh)
    assert main(["--quiet", "classify", str(data_path), "-m", str(model_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    got = {int(ln.split("|")[0]): ln.split("|")[1] for ln in lines}
    assert got == {asn: (exp or "ABSTAIN") for asn, (_, exp) in cases.items()}


def _run_bytes(argv, out_path, capsys):
    assert main(argv + ["-o", str(out_path)]) == 0
    capsys.readouterr()
    return out_path.read_bytes()


@acceptance(9, "determinism: train and validate byte-identical across runs and 1 vs N workers")
def test_cli_determinism(corpus120, tmp_path, capsys):
    data = tmp_path / "corpus.txt"
    with open(data, "w") as fh:
        write_dataset(((e.record, e.label) for e in corpus120), fh)
    out = tmp_path / "out.txt"
    train_argv = ["--quiet", "--seed", "5", "train", str(data)]
    t1 = _run_bytes(train_argv, out, capsys)
    t2 = _run_bytes(train_argv, out, capsys)
    t4 = _run_bytes(train_argv + ["--workers", "4"], out, capsys)
    assert t1 == t2 == t4 and t1.startswith(b"astaxon-model v1")

    val_argv = ["--quiet", "--seed", "7", "validate", str(data), "--holdout", "20", "--iterations", "6", "--sizes", "10,40,100", "--rounds", "10"]
    v1 = _run_bytes(val_argv, out, capsys)
    v2 = _run_bytes(val_argv, out, capsys)
    v4 = _run_bytes(val_argv + ["--workers", "4"], out, capsys)
    assert v1 == v2 == v4
    assert _run_bytes(["--quiet", "--seed", "8"] + val_argv[3:], out, capsys) != v1


@acceptance(10, "model round-trip: structural equality and identical classification on 100 records")
def test_model_round_trip():
    rng = random.Random(1010)
    S = generate_corpus(n=150, seed=3, clean=False)
    model = train(S, TrainConfig())
    buf = io.StringIO()
    save_model(model, buf)
    loaded = load_model(io.StringIO(buf.getvalue()))
    assert loaded == model
    vocab = sorted({t for e in S for t in e.record.description_terms})
    for i in range(100):
        record = AsRecord(
            i + 1,
            tuple(rng.choice(vocab) for _ in range(rng.randint(0, 5))),
            *(rng.randint(0, 10 ** rng.randint(0, 5)) for _ in range(5)),
        )
        assert classify(model, record) == classify(loaded, record)
        assert np.array_equal(model.scores(record), loaded.scores(record))
