import pytest

from astaxon.boosting import Model, load_model, save_model
from astaxon.cli import main
from astaxon.core import AsClass
from astaxon.ingest import read_dataset, write_dataset
from astaxon.synthetic import bundled_corpus


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.txt"
    with open(path, "w") as fh:
        write_dataset(((e.record, e.label) for e in bundled_corpus()), fh)
    return path


@pytest.fixture
def mini(data_dir):
    return data_dir / "mini"


def test_ingest_all_sources(mini, tmp_path, capsys):
    out = tmp_path / "ds.txt"
    code, _, err = run(
        [
            "ingest",
            "--routes", str(mini / "routes.txt"),
            "--topology-routes", str(mini / "topology.txt"),
            "--relationships", str(mini / "relationships.txt"),
            "--descriptions", str(mini / "descriptions.txt"),
            "--labels", str(mini / "labels.txt"),
            "-o", str(out),
        ],
        capsys,
    )
    assert code == 0
    rows = read_dataset(out.read_text().splitlines())
    expected = [int(x) for x in (mini / "expected_universe.txt").read_text().splitlines() if not x.startswith("#")]
    assert [r.asn for r, _ in rows] == expected
    by_asn = {r.asn: (r, label) for r, label in rows}
    uni, label = by_asn[10]
    assert label is AsClass.UNIVERSITY
    assert uni.description_terms == ("seoul", "nation", "univers", "educ")
    assert (uni.providers, uni.prefixes, uni.space) == (1, 2, 1)
    assert by_asn[701][0].customers == 1 and by_asn[701][0].peers == 2
    assert by_asn[3356][0].prefixes == 1  # 192.0.2.0/24 after private-tail removal
    assert by_asn[42][1] is AsClass.IXP
    assert "records: 11 (labeled 4)" in err
    assert "malformed=1" in err


def test_ingest_descriptions_only(mini, capsys):
    code, out, _ = run(["--quiet", "ingest", "--descriptions", str(mini / "descriptions.txt")], capsys)
    assert code == 0
    rows = read_dataset(out.splitlines())
    assert len(rows) == 5
    assert all(r.customers == r.providers == r.peers == r.prefixes == r.space == 0 for r, _ in rows)


def test_ingest_needs_a_source(capsys):
    code, _, err = run(["ingest"], capsys)
    assert code == 1 and "at least one" in err


def test_missing_stopword_file_names_path(mini, tmp_path, capsys):
    missing = tmp_path / "nope.txt"
    code, _, err = run(["ingest", "--stopwords", str(missing), "--descriptions", str(mini / "descriptions.txt")], capsys)
    assert code == 1
    assert str(missing) in err


def test_ingest_conflicting_relationships_is_data_error(tmp_path, capsys):
    rel = tmp_path / "rel.txt"
    rel.write_text("1|2|-1\n2|1|0\n")
    code, _, err = run(["ingest", "--relationships", str(rel)], capsys)
    assert code == 2 and "line 2" in err


def test_train_rounds_and_flag_echo(corpus_file, tmp_path, capsys):
    model_path = tmp_path / "m.txt"
    code, _, err = run(["train", str(corpus_file), "--rounds", "6", "-o", str(model_path)], capsys)
    assert code == 0
    lines = model_path.read_text().splitlines()
    assert len(lines) == 7
    assert lines[0].startswith("astaxon-model v1 k=6 T=6 ")
    assert f"config: m=120 {lines[0]}" in err
    assert "round" in err and "description" in err
    assert load_model(lines).T == 6


def test_train_default_model_reloads(corpus_file, capsys):
    code, out, _ = run(["--quiet", "train", str(corpus_file)], capsys)
    assert code == 0
    model = load_model(out.splitlines())
    assert model.T == 28 and model.max_sequence_len == 2


def test_train_supplement_and_unlabeled(tmp_path, capsys):
    ds = tmp_path / "ds.txt"
    ds.write_text("1|0|0|0|0|0|univers|university\n2|0|0|0|0|0|bank|\n")
    sup = tmp_path / "sup.txt"
    sup.write_text("3|900|0|9|9|9000|backbon|large_isp\n")
    code, _, err = run(["train", str(ds), "--rounds", "2", "--supplement", str(sup)], capsys)
    assert code == 0
    assert "unlabeled rows ignored: 1" in err and "supplement: 1" in err
    assert "config: m=2 " in err


def test_train_no_labeled_rows(tmp_path, capsys):
    ds = tmp_path / "ds.txt"
    ds.write_text("1|0|0|0|0|0|univers|\n")
    code, _, err = run(["train", str(ds)], capsys)
    assert code == 2 and "no labeled rows" in err


@pytest.mark.parametrize("flags", [["--rounds", "0"], ["--smoothing", "-1"], ["--max-seq", "0"], ["--workers", "0"]])
def test_train_bad_config_exit_1(corpus_file, flags, capsys):
    code, _, _ = run(["train", str(corpus_file), *flags], capsys)
    assert code == 1


def test_usage_errors_exit_1(capsys):
    assert run([], capsys)[0] == 1
    assert run(["frobnicate"], capsys)[0] == 1
    assert run(["train"], capsys)[0] == 1
    assert run(["train", "/no/such/file"], capsys)[0] == 1
    assert run(["train", "x", "--rounds", "many"], capsys)[0] == 1


def test_malformed_dataset_exit_2(tmp_path, capsys):
    ds = tmp_path / "ds.txt"
    ds.write_text("1|0|0|0|0|0||\n1|2|3\n")
    code, _, err = run(["train", str(ds)], capsys)
    assert code == 2 and "line 2" in err
    bad = tmp_path / "bad.txt"
    bad.write_bytes(b"\xff\xfe\x00")
    assert run(["train", str(bad)], capsys)[0] == 2


def _empty_model(tmp_path):
    path = tmp_path / "empty.txt"
    with open(path, "w") as fh:
        save_model(Model((), 0.1, 2), fh)
    return path


def test_classify_empty_model_abstains(corpus_file, tmp_path, capsys):
    code, out, err = run(["classify", str(corpus_file), "-m", str(_empty_model(tmp_path))], capsys)
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 120
    assert all(ln.split("|")[1] == "ABSTAIN" for ln in lines)
    assert lines[0].split("|")[2] == "0,0,0,0,0,0"
    assert "ABSTAIN" in err and "120" in err


def test_classify_lines_and_summary(corpus_file, tmp_path, capsys):
    model_path = tmp_path / "m.txt"
    assert run(["--quiet", "train", str(corpus_file), "-o", str(model_path)], capsys)[0] == 0
    code, out, err = run(["classify", str(corpus_file), "-m", str(model_path)], capsys)
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 120
    model = load_model(model_path.read_text().splitlines())
    rows = read_dataset(corpus_file.read_text().splitlines())
    for ln, (record, label) in zip(lines, rows):
        asn, predicted, scores = ln.split("|")
        assert int(asn) == record.asn
        assert predicted == label.token
        assert tuple(float(s) for s in scores.split(",")) == model.ranking(record).scores
    assert "customer" in err


def test_classify_bad_model_exit_2(corpus_file, tmp_path, capsys):
    bad = tmp_path / "m.txt"
    bad.write_text("astaxon-model v9 k=6 T=0 eps=0.1 maxseq=2\n")
    code, _, err = run(["classify", str(corpus_file), "-m", str(bad)], capsys)
    assert code == 2 and "version" in err


def test_validate_output_and_config_errors(corpus_file, capsys):
    code, out, _ = run(["--quiet", "validate", str(corpus_file), "--holdout", "20", "--iterations", "2", "--sizes", "10,100", "--rounds", "5"], capsys)
    assert code == 0
    table, machine = out.split("\n\n")
    assert table.splitlines()[0].split()[:2] == ["size", "accuracy"]
    m_lines = machine.splitlines()
    assert m_lines[0] == "# size|mean_acc|sd_acc|mean_cov|sd_cov"
    assert [ln.split("|")[0] for ln in m_lines[1:]] == ["10", "100"]
    assert run(["validate", str(corpus_file), "--holdout", "20", "--sizes", "101"], capsys)[0] == 1
    assert run(["validate", str(corpus_file), "--holdout", "120"], capsys)[0] == 1
    assert run(["validate", str(corpus_file), "--holdout", "20", "--sizes", "a,b"], capsys)[0] == 1
    assert run(["validate", str(corpus_file), "--holdout", "20", "--iterations", "0"], capsys)[0] == 1


def test_validate_defaults_match_protocol(tmp_path, capsys):
    # defaults: holdout 100 and 400 iterations; 120 rows leave 20 for training
    from astaxon.cli import build_parser

    args = build_parser().parse_args(["validate", "x"])
    assert args.holdout == 100 and args.iterations == 400 and args.rounds == 28


def test_validate_repeatable(corpus_file, capsys):
    argv = ["--quiet", "--seed", "7", "validate", str(corpus_file), "--holdout", "20", "--iterations", "1", "--sizes", "30", "--rounds", "4"]
    first = run(argv, capsys)
    second = run(argv, capsys)
    assert first == second and first[0] == 0


def test_stats(corpus_file, tmp_path, capsys):
    code, out, _ = run(["stats", str(corpus_file), "-m", str(_empty_model(tmp_path))], capsys)
    assert code == 0
    assert "records: 120" in out and "labeled: 120" in out
    assert "ABSTAIN" in out


def test_seed_flag_position(corpus_file, capsys):
    argv_after = ["validate", str(corpus_file), "--seed", "3", "--holdout", "20", "--iterations", "1", "--sizes", "20", "--rounds", "3", "--quiet"]
    argv_before = ["--seed", "3", "--quiet", "validate", str(corpus_file), "--holdout", "20", "--iterations", "1", "--sizes", "20", "--rounds", "3"]
    assert run(argv_after, capsys) == run(argv_before, capsys)
