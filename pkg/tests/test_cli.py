import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from _synth import make_corpus, noise_image

from vwsd import PipelineConfig
from vwsd.cli import main
from vwsd.pipeline import build_runtime, rank_sample


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def cli_corpus(tmp_path):
    spec = make_corpus(tmp_path / "corpus", n_samples=3, image_size=32, seed=21)
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({
        "mock_embedding_dim": 64,
        "mock_image_resolution": 32,
        "collect_timings": False,
    }), encoding="utf-8")
    spec["config"] = config_path
    spec["tmp"] = tmp_path
    return spec


def evaluate_args(spec, output, extra=()):
    return [
        "evaluate",
        "--config", str(spec["config"]),
        "--data", str(spec["data"]),
        "--gold", str(spec["gold"]),
        "--images", str(spec["images"]),
        "--output", str(output),
        *extra,
    ]


class TestEvaluateCommand:
    def test_smoke_writes_report_and_summary(self, runner, cli_corpus):
        output = cli_corpus["tmp"] / "report.json"
        result = runner.invoke(main, evaluate_args(cli_corpus, output))
        assert result.exit_code == 0, result.output
        assert output.exists()
        assert "MRR" in result.output and "Hit Rate" in result.output
        report = json.loads(output.read_text())
        assert set(report) == {"config", "aggregates", "latency", "per_sample", "skipped"}
        assert report["aggregates"]["evaluated"] == 3

    def test_invalid_config_key_exits_2_and_names_key(self, runner, cli_corpus):
        output = cli_corpus["tmp"] / "report.json"
        result = runner.invoke(
            main, evaluate_args(cli_corpus, output, extra=["--set", "bogus_key=1"])
        )
        assert result.exit_code == 2
        assert "bogus_key" in result.output

    def test_missing_data_file_exits_2(self, runner, cli_corpus):
        args = evaluate_args(cli_corpus, cli_corpus["tmp"] / "r.json")
        args[args.index("--data") + 1] = str(cli_corpus["tmp"] / "nope.tsv")
        result = runner.invoke(main, args)
        assert result.exit_code == 2

    def test_byte_identical_reruns(self, runner, cli_corpus):
        out_a = cli_corpus["tmp"] / "a.json"
        out_b = cli_corpus["tmp"] / "b.json"
        assert runner.invoke(main, evaluate_args(cli_corpus, out_a)).exit_code == 0
        assert runner.invoke(main, evaluate_args(cli_corpus, out_b)).exit_code == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_cli_report_matches_library_evaluate(self, runner, cli_corpus):
        from vwsd import evaluate, load_config, load_dataset

        output = cli_corpus["tmp"] / "cli.json"
        assert runner.invoke(main, evaluate_args(cli_corpus, output)).exit_code == 0
        samples = load_dataset(cli_corpus["data"], cli_corpus["gold"], cli_corpus["images"])
        report = evaluate(samples, load_config(cli_corpus["config"]))
        assert json.loads(output.read_text()) == report.to_dict()

    def test_seed_override_changes_only_stochastic_views(self, runner, cli_corpus):
        # deterministic single-view config: different seeds, identical rankings
        out_a = cli_corpus["tmp"] / "s1.json"
        out_b = cli_corpus["tmp"] / "s2.json"
        runner.invoke(main, evaluate_args(cli_corpus, out_a, extra=["--seed", "1"]))
        runner.invoke(main, evaluate_args(cli_corpus, out_b, extra=["--seed", "2"]))
        a = json.loads(out_a.read_text())
        b = json.loads(out_b.read_text())
        assert a["per_sample"] == b["per_sample"]
        assert a["config"]["seed"] == 1 and b["config"]["seed"] == 2

        # stochastic augmentations: different seeds, different scores
        extra = ["--set", "augmentations_enabled=true"]
        runner.invoke(main, evaluate_args(cli_corpus, out_a, extra=extra + ["--seed", "1"]))
        runner.invoke(main, evaluate_args(cli_corpus, out_b, extra=extra + ["--seed", "2"]))
        a = json.loads(out_a.read_text())
        b = json.loads(out_b.read_text())
        assert a["per_sample"] != b["per_sample"]


class TestPredictCommand:
    def test_ranks_ten_images_in_descending_order(self, runner, cli_corpus, tmp_path):
        paths = []
        for j in range(10):
            path = tmp_path / f"cand{j}.png"
            noise_image(900 + j, 32).save(path)
            paths.append(str(path))
        result = runner.invoke(main, [
            "predict", "--config", str(cli_corpus["config"]),
            "bank", "bank erosion", *paths,
        ])
        assert result.exit_code == 0, result.output
        lines = result.output.strip().split("\n")
        assert len(lines) == 10
        scores = [float(line.split()[2]) for line in lines]
        assert scores == sorted(scores, reverse=True)

    def test_wrong_image_count_exits_2(self, runner, cli_corpus, tmp_path):
        path = tmp_path / "one.png"
        noise_image(1, 32).save(path)
        result = runner.invoke(main, [
            "predict", "--config", str(cli_corpus["config"]),
            "bank", "bank erosion", str(path),
        ])
        assert result.exit_code == 2

    def test_cli_scores_match_library_call(self, runner, cli_corpus, tmp_path):
        from vwsd import Sample

        paths = []
        for j in range(10):
            path = tmp_path / f"img{j}.png"
            noise_image(700 + j, 32).save(path)
            paths.append(str(path))
        result = runner.invoke(main, [
            "predict", "--config", str(cli_corpus["config"]),
            "tank", "water tank", *paths,
        ])
        assert result.exit_code == 0
        cli_scores = {}
        for line in result.output.strip().split("\n"):
            parts = line.split()
            cli_scores[int(parts[1].strip("[]"))] = float(parts[2])

        config = PipelineConfig(mock_embedding_dim=64, mock_image_resolution=32,
                                collect_timings=False)
        sample = Sample(id="x", target_word="tank", context_phrase="water tank",
                        candidates=tuple(paths))
        result_lib = rank_sample(sample, build_runtime(config), tmp_path / "..")
        for j in range(10):
            assert cli_scores[j] == pytest.approx(round(result_lib.scores[j], 6), abs=1e-6)


class TestAblateCommand:
    def test_two_configs_two_reports_one_table(self, runner, cli_corpus):
        vanilla = cli_corpus["tmp"] / "vanilla.json"
        vanilla.write_text(json.dumps({
            "mock_embedding_dim": 64, "mock_image_resolution": 32,
            "prompts_enabled": False, "collect_timings": False,
        }), encoding="utf-8")
        out_dir = cli_corpus["tmp"] / "ablation"
        result = runner.invoke(main, [
            "ablate",
            "--config", f"prompted={cli_corpus['config']}",
            "--config", f"vanilla={vanilla}",
            "--data", str(cli_corpus["data"]),
            "--gold", str(cli_corpus["gold"]),
            "--images", str(cli_corpus["images"]),
            "--output-dir", str(out_dir),
        ])
        assert result.exit_code == 0, result.output
        assert (out_dir / "prompted.json").exists()
        assert (out_dir / "vanilla.json").exists()
        tsv = (out_dir / "comparison.tsv").read_text()
        assert len(tsv.strip().split("\n")) == 3


class TestTuneCommand:
    def test_single_trial_log(self, runner, cli_corpus, tmp_path):
        spec = make_corpus(tmp_path / "tune_corpus", n_samples=5, image_size=32, seed=33)
        output = cli_corpus["tmp"] / "tuning.json"
        result = runner.invoke(main, [
            "tune",
            "--config", str(cli_corpus["config"]),
            "--data", str(spec["data"]),
            "--gold", str(spec["gold"]),
            "--images", str(spec["images"]),
            "--trials", "1",
            "--space", "beta_p=0.0:1.0",
            "--output", str(output),
        ])
        assert result.exit_code == 0, result.output
        payload = json.loads(output.read_text())
        assert len(payload["trials"]) == 1
        assert "best_config" in payload


class TestDumpViewsCommand:
    def test_default_profile_dumps_28_labeled_views(self, runner, cli_corpus, tmp_path):
        image = tmp_path / "input.png"
        noise_image(31, 64).save(image)
        out_dir = tmp_path / "views"
        result = runner.invoke(main, [
            "dump-views", "--config", str(cli_corpus["config"]),
            "--set", "augmentations_enabled=true",
            "--image", str(image), "--output-dir", str(out_dir),
        ])
        assert result.exit_code == 0, result.output
        files = sorted(out_dir.glob("*.png"))
        assert len(files) == 28


def test_reports_are_bit_reproducible_across_processes(cli_corpus):
    """Two fresh interpreter runs over the same inputs write identical bytes."""
    outputs = []
    for name in ("p1.json", "p2.json"):
        output = cli_corpus["tmp"] / name
        cmd = [sys.executable, "-m", "vwsd.cli"] + evaluate_args(cli_corpus, output)[0:]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(output.read_bytes())
    assert outputs[0] == outputs[1]
