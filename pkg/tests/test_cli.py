import json
import random

import pytest

from botcut.cli import STATS_COLUMNS, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "-o", str(out)]) == 0
    return out


def test_validate(capsys, tmp_path):
    assert run(capsys, "validate")[:2] == (0, "ok\n")
    code, out, _ = run(capsys, "validate", "--lambda1", "0.9", "--lambda2", "0.3")
    assert code == 1 and "positivity" in out
    assert run(capsys, "validate", "--config", tmp_path / "missing.cfg")[0] == 2
    cfg = tmp_path / "p.cfg"
    cfg.write_text("# heterophily broken\nlambda1 = 0.6\nlambda2=0.8\n")
    code, out, _ = run(capsys, "validate", "--config", cfg, "--manifest", tmp_path / "m.json")
    assert code == 1 and "heterophily" in out
    manifest = json.loads((tmp_path / "m.json").read_text())
    assert manifest["command"] == "validate" and manifest["parameters"]["lambda1"] == 0.6
    cfg.write_text("lambda3=1\n")
    assert run(capsys, "validate", "--config", cfg)[0] == 1


def test_detect_default_synth(capsys, synth_dir, tmp_path):
    det = tmp_path / "det.jsonl"
    code, _, _ = run(capsys, "detect", synth_dir / "edges.csv", "-o", det, "--alpha1", 10, "--alpha2", 10)
    assert code == 0
    lines = det.read_text().splitlines()
    assert len(lines) == 5000
    rec = json.loads(lines[0])
    assert set(rec) == {"account_id", "map_label", "p_bot", "z_out", "z_in"}
    manifest = json.loads((tmp_path / "det.jsonl.manifest.json").read_text())
    assert manifest["parameters"]["alpha1"] == 10.0
    assert str(synth_dir / "edges.csv") in manifest["inputs"]
    assert {"read", "build", "max_flow", "marginals", "total"} <= set(manifest["timings_s"])
    meta = json.loads((tmp_path / "det.jsonl.meta.json").read_text())
    assert meta["min_cut_value"] == pytest.approx(meta["max_flow_value"], rel=1e-9)

    code, out, _ = run(capsys, "eval", det, synth_dir / "truth.csv", "-o", tmp_path / "ev")
    assert code == 0 and out.startswith("auc=")
    assert float(out.strip().split("=")[1]) >= 0.9
    summary = json.loads((tmp_path / "ev" / "auc.json").read_text())
    assert summary["P"] == 500 and summary["N"] == 4500
    assert (tmp_path / "ev" / "roc.csv").read_text().startswith("fpr,tpr,threshold\n")


def test_detect_idempotent(capsys, tmp_path):
    edges = tmp_path / "e.csv"
    edges.write_text("src,dst,weight\na,b,3\nc,b,2\nb,d,1\nd,a,5\n")
    outs = []
    for k in range(2):
        det = tmp_path / f"d{k}.jsonl"
        assert run(capsys, "detect", edges, "-o", det, "--workers", 1)[0] == 0
        outs.append(det.read_bytes())
    assert outs[0] == outs[1]


def test_detect_empty_and_invalid(capsys, tmp_path):
    edges = tmp_path / "e.csv"
    edges.write_text("")
    det = tmp_path / "d.jsonl"
    assert run(capsys, "detect", edges, "-o", det)[0] == 0
    assert det.read_text() == ""

    edges.write_text("a,b,1\n")
    det2 = tmp_path / "d2.jsonl"
    code, _, err = run(capsys, "detect", edges, "-o", det2, "--lambda1", 0.9, "--lambda2", 0.3)
    assert code == 1 and "positivity" in err
    assert not det2.exists()
    assert run(capsys, "detect", tmp_path / "nope.csv", "-o", det2)[0] == 2
    edges.write_text("a,b,1\na,b,zero\n")
    code, _, err = run(capsys, "detect", edges, "-o", det2)
    assert code == 1 and "line 2" in err


def test_detect_with_priors(capsys, tmp_path):
    edges = tmp_path / "e.csv"
    edges.write_text("a,b,1\n")
    priors = tmp_path / "p.csv"
    # a strong human prior on a overrides the single retweet
    priors.write_text("account_id,value\na,human\n")
    det = tmp_path / "d.jsonl"
    assert run(capsys, "detect", edges, "-o", det, "--priors", priors, "--prior-strength", 0.99)[0] == 0
    recs = {json.loads(x)["account_id"]: json.loads(x) for x in det.read_text().splitlines()}
    assert recs["a"]["map_label"] == "human"
    priors.write_text("a,1.5\n")
    assert run(capsys, "detect", edges, "-o", det, "--priors", priors)[0] == 1


def write_detections(path, scores, labels=None):
    with open(path, "w") as fh:
        for a, p in scores.items():
            label = labels[a] if labels else ("bot" if p >= 0.5 else "human")
            fh.write(json.dumps({"account_id": a, "map_label": label, "p_bot": p}) + "\n")


def test_eval_perfect_shuffled_missing(capsys, synth_dir, tmp_path):
    truth = dict(line.split(",") for line in (synth_dir / "truth.csv").read_text().split()[1:])
    perfect = {a: (1.0 if c == "bot" else 0.0) for a, c in truth.items()}
    det = tmp_path / "d.jsonl"
    write_detections(det, perfect)
    code, out, _ = run(capsys, "eval", det, synth_dir / "truth.csv", "-o", tmp_path)
    assert code == 0 and out == "auc=1.000000\n"

    values = list(perfect.values())
    random.Random(3).shuffle(values)
    write_detections(det, dict(zip(perfect, values)))
    code, out, _ = run(capsys, "eval", det, synth_dir / "truth.csv", "-o", tmp_path)
    assert code == 0 and abs(float(out.split("=")[1]) - 0.5) <= 0.05

    dropped = dict(list(perfect.items())[1:])
    write_detections(det, dropped)
    code, _, err = run(capsys, "eval", det, synth_dir / "truth.csv", "-o", tmp_path)
    assert code == 1 and next(iter(perfect)) in err


def test_stats(capsys, synth_dir, tmp_path):
    code, out, _ = run(capsys, "stats", synth_dir / "edges.csv", synth_dir / "truth.csv", "-o", tmp_path / "s.csv")
    assert code == 0
    header, values = out.strip().split("\n")
    assert header.split(",") == STATS_COLUMNS
    row = dict(zip(STATS_COLUMNS, map(float, values.split(","))))
    assert row["B->H"] > row["B->B"] and row["H->H"] > row["H->B"]
    assert (tmp_path / "s.csv").read_text() == out

    edges, labels = tmp_path / "e.csv", tmp_path / "l.csv"
    edges.write_text("b1,h1,6\nb2,h1,4\nb1,h2,2\nh1,h2,3\nh2,b1,1\nb1,b2,1\n")
    labels.write_text("b1,bot\nb2,bot\nh1,human\nh2,human\n")
    code, out, _ = run(capsys, "stats", edges, labels)
    row = dict(zip(STATS_COLUMNS, map(float, out.strip().split("\n")[1].split(",")[:4])))
    # b1 -> {h1:6, h2:2} = 4, b2 -> {h1:4} = 4, b1 -> b2 = 1, h1 -> h2 = 3, h2 -> b1 = 1
    assert row == {"B->H": 4.0, "B->B": 1.0, "H->H": 3.0, "H->B": 1.0}

    labels.write_text("b1,human\nb2,human\nh1,human\nh2,human\n")
    assert run(capsys, "stats", edges, labels)[0] == 1


def test_synth(capsys, tmp_path):
    for k in (1, 2):
        assert run(capsys, "synth", "-o", tmp_path / f"r{k}", "--n-accounts", 300, "--seed", 7)[0] == 0
    for name in ("edges.csv", "truth.csv", "config.json"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()
    assert json.loads((tmp_path / "r1" / "config.json").read_text())["n_accounts"] == 300
    code, _, err = run(capsys, "synth", "-o", tmp_path / "bad", "--bot-fraction", 0)
    assert code == 1 and "bot_fraction" in err
    assert run(capsys, "synth", "-o", tmp_path / "four", "--n-accounts", 4)[0] == 0
    truth = (tmp_path / "four" / "truth.csv").read_text()
    assert truth.count(",bot") == 1 and truth.count(",human") == 3
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_accounts": 50, "colour": 1}))
    assert run(capsys, "synth", "-o", tmp_path / "x", "--config", cfg)[0] == 1


def test_hashtags(capsys, tmp_path):
    det = tmp_path / "d.jsonl"
    write_detections(det, {"b1": 0.9, "b2": 0.8, "h1": 0.1})
    tweets = tmp_path / "t.jsonl"
    tweets.write_text("\n".join(json.dumps(x) for x in [
        {"account_id": "b1", "hashtags": ["#X", "y"]},
        {"account_id": "b2", "hashtags": ["x", "#Z"]},
        {"account_id": "h1", "hashtags": ["w"]},
    ]) + "\n")
    code, out, _ = run(capsys, "hashtags", tweets, det)
    assert code == 0 and out == "hashtag,count\nx,2\ny,1\nz,1\n"

    tweets.write_text(json.dumps({"account_id": "b1", "hashtags": ["w"]}) + "\n"
                      + json.dumps({"account_id": "h1", "hashtags": ["#W"]}) + "\n")
    assert run(capsys, "hashtags", tweets, det)[1] == "hashtag,count\n"

    tweets.write_text(json.dumps({"account_id": "b1", "hashtags": []}) + "\n{broken\n")
    code, _, err = run(capsys, "hashtags", tweets, det)
    assert code == 1 and "line 2" in err


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["detect"])
    assert exc.value.code == 2
