import pytest

from seqmark.cli import main
from seqmark.data_io import load_checkpoint, load_well_csv
from seqmark.inference import read_predictions_csv

TINY_NET = [
    "--set", "global_channels=4,6",
    "--set", "global_kernels=3,5",
    "--set", "local_layers=2",
    "--set", "local_channels=6",
    "--set", "local_dilations=1,2",
    "--set", "fusion_channels=4",
]
FAST_TRAIN = ["--set", "max_epochs=2", "--set", "patience=2"]


def run(argv):
    return main([str(a) for a in argv])


def synth_tiny(out_dir, wells=6, seed=3, channels="gr", markers="M1:strong"):
    rc = run([
        "synth", "--out", out_dir, "--wells", wells, "--seed", seed,
        "--channels", channels, "--markers", markers,
        "--length-range", "140,200",
    ])
    assert rc == 0
    return out_dir


class TestSynth:
    def test_writes_wells_picks_manifest(self, tmp_path, capsys):
        out = synth_tiny(tmp_path / "ds", wells=5)
        files = sorted((out / "wells").glob("*.csv"))
        assert len(files) == 5
        assert (out / "picks.csv").is_file()
        assert (out / "manifest.txt").is_file()
        assert "5 wells" in capsys.readouterr().out

    def test_deterministic_across_runs(self, tmp_path):
        a = synth_tiny(tmp_path / "a")
        b = synth_tiny(tmp_path / "b")
        for fa, fb in zip(sorted((a / "wells").glob("*.csv")),
                          sorted((b / "wells").glob("*.csv"))):
            assert fa.read_bytes() == fb.read_bytes()
        assert (a / "picks.csv").read_bytes() == (b / "picks.csv").read_bytes()

    def test_three_channel_columns(self, tmp_path):
        out = synth_tiny(tmp_path / "ds", channels="gr,res,den")
        well = load_well_csv(next(iter(sorted((out / "wells").glob("*.csv")))))
        assert well.channels == ("GR", "RES", "DEN")
        assert well.samples.shape[0] == 3

    def test_bad_marker_spec(self, tmp_path, capsys):
        rc = run(["synth", "--out", tmp_path / "ds", "--markers", "M1"])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error:")


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """One tiny trained checkpoint shared by the predict/eval tests."""
    root = tmp_path_factory.mktemp("cli_flow")
    data = synth_tiny(root / "ds", wells=8, seed=1)
    ckpt = root / "m1.smck"
    rc = run([
        "train", "--data", data, "--marker", "M1", "--seed", 5,
        "--out", ckpt, *TINY_NET, *FAST_TRAIN,
    ])
    assert rc == 0
    return root, data, ckpt


class TestTrain:
    def test_checkpoint_and_history_written(self, trained, capsys):
        root, data, ckpt = trained
        assert ckpt.is_file()
        history = ckpt.with_suffix(".history.csv")
        assert history.is_file()
        lines = history.read_text().splitlines()
        assert lines[0] == "epoch,train_loss,val_loss"
        assert len(lines) >= 2

    def test_rerun_same_seed_identical_checkpoint(self, tmp_path, trained):
        root, data, ckpt = trained
        again = tmp_path / "again.smck"
        rc = run([
            "train", "--data", data, "--marker", "M1", "--seed", 5,
            "--out", again, *TINY_NET, *FAST_TRAIN,
        ])
        assert rc == 0
        a = ckpt.read_text().splitlines()
        b = again.read_text().splitlines()
        assert a == b

    def test_mode_flag_selects_ablation_head(self, tmp_path, trained):
        root, data, _ = trained
        out = tmp_path / "g.smck"
        rc = run([
            "train", "--data", data, "--marker", "M1", "--seed", 5,
            "--mode", "global", "--out", out, *TINY_NET, *FAST_TRAIN,
        ])
        assert rc == 0
        net, _ = load_checkpoint(out)
        assert net.config.fusion_mode == "global_only"

    def test_unknown_marker_fails(self, tmp_path, trained, capsys):
        root, data, _ = trained
        rc = run([
            "train", "--data", data, "--marker", "NOPE",
            "--out", tmp_path / "x.smck", *TINY_NET, *FAST_TRAIN,
        ])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_unknown_config_key_fails(self, tmp_path, trained, capsys):
        root, data, _ = trained
        rc = run([
            "train", "--data", data, "--marker", "M1",
            "--out", tmp_path / "x.smck", "--set", "learning_rat=1",
        ])
        assert rc == 1
        assert "unknown config key" in capsys.readouterr().err

    def test_config_file_merges_with_flag_overrides(self, tmp_path, trained):
        root, data, _ = trained
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# tiny run\n"
            "max_epochs = 2\npatience = 2\nfusion_channels = 4\n"
            "global_channels = 4,6\nglobal_kernels = 3,5\n"
            "local_layers = 2\nlocal_channels = 6\nlocal_dilations = 1,2\n"
            "dropout = 0.2\n"
        )
        out = tmp_path / "c.smck"
        rc = run([
            "train", "--data", data, "--marker", "M1", "--seed", 5,
            "--config", cfg, "--set", "dropout=0.3", "--out", out,
        ])
        assert rc == 0
        net, _ = load_checkpoint(out)
        assert net.config.dropout == 0.3


class TestPredict:
    def test_single_pass_zero_uncertainty(self, trained, tmp_path, capsys):
        root, data, ckpt = trained
        pred = tmp_path / "pred.csv"
        rc = run(["predict", "--model", ckpt, "--wells", data,
                  "--mc-passes", 1, "--out", pred])
        assert rc == 0
        dets = read_predictions_csv(pred)
        assert len(dets) == 8
        assert all(d.uncertainty_ft == 0.0 for d in dets)

    def test_curves_rows_match_lengths(self, trained, tmp_path):
        root, data, ckpt = trained
        pred = tmp_path / "pred.csv"
        curves = tmp_path / "curves.csv"
        rc = run(["predict", "--model", ckpt, "--wells", data,
                  "--mc-passes", 1, "--out", pred, "--curves", curves])
        assert rc == 0
        wells = sorted((data / "wells").glob("*.csv"))
        total = sum(load_well_csv(w).n_samples for w in wells)
        lines = curves.read_text().splitlines()
        assert len(lines) == total + 1
        _, depth, prob, score = lines[1].split(",")
        assert 0.0 < float(prob) < 1.0
        assert -1.0 < float(score) < 1.0

    def test_validity_obeys_thresholds(self, trained, tmp_path):
        root, data, ckpt = trained
        pred = tmp_path / "pred.csv"
        rc = run(["predict", "--model", ckpt, "--wells", data,
                  "--mc-passes", 3, "--out", pred,
                  "--set", "prob_threshold=0.0", "--set", "uncertainty_threshold_ft=5.0"])
        assert rc == 0
        for d in read_predictions_csv(pred):
            assert d.valid == (d.probability > 0.0 and d.uncertainty_ft < 5.0)

    def test_channel_mismatch_names_both_sides(self, trained, tmp_path, capsys):
        root, data, ckpt = trained
        other = synth_tiny(tmp_path / "mc", wells=3, channels="gr,res")
        rc = run(["predict", "--model", ckpt, "--wells", other,
                  "--out", tmp_path / "p.csv"])
        assert rc == 1
        err = capsys.readouterr().err
        assert "error:" in err and "GR" in err and "RES" in err

    def test_single_file_input(self, trained, tmp_path):
        root, data, ckpt = trained
        one = sorted((data / "wells").glob("*.csv"))[0]
        pred = tmp_path / "one.csv"
        rc = run(["predict", "--model", ckpt, "--wells", one,
                  "--mc-passes", 1, "--out", pred])
        assert rc == 0
        assert len(read_predictions_csv(pred)) == 1


class TestEval:
    def test_perfect_predictions_print_f1_one(self, tmp_path, capsys):
        truth = tmp_path / "truth.csv"
        truth.write_text(
            "well_id,marker,depth_ft\nw0,A,100.0\nw1,A,200.0\n"
        )
        pred = tmp_path / "pred.csv"
        pred.write_text(
            "well_id,marker,depth_ft,probability,uncertainty_ft,valid\n"
            "w0,A,100.0,0.99,0.5,true\nw1,A,200.0,0.98,0.4,true\n"
        )
        out = tmp_path / "report.csv"
        rc = run(["eval", "--pred", pred, "--truth", truth, "--out", out])
        assert rc == 0
        assert "F1@2ft = 1.0" in capsys.readouterr().out
        assert out.is_file()
        assert out.with_suffix(".hist.csv").is_file()

    def test_degenerate_all_invalid(self, tmp_path, capsys):
        truth = tmp_path / "truth.csv"
        truth.write_text("well_id,marker,depth_ft\nw0,A,100.0\n")
        pred = tmp_path / "pred.csv"
        pred.write_text(
            "well_id,marker,depth_ft,probability,uncertainty_ft,valid\n"
            "w0,A,120.0,0.1,9.0,false\n"
        )
        out = tmp_path / "report.csv"
        rc = run(["eval", "--pred", pred, "--truth", truth, "--out", out])
        assert rc == 0
        assert "F1@2ft = 0.0" in capsys.readouterr().out
        body = out.read_text()
        assert "NA" in body

    def test_missing_truth_row_fails(self, tmp_path, capsys):
        truth = tmp_path / "truth.csv"
        truth.write_text("well_id,marker,depth_ft\nw0,A,100.0\n")
        pred = tmp_path / "pred.csv"
        pred.write_text(
            "well_id,marker,depth_ft,probability,uncertainty_ft,valid\n"
            "w9,A,100.0,0.9,0.5,true\n"
        )
        rc = run(["eval", "--pred", pred, "--truth", truth,
                  "--out", tmp_path / "r.csv"])
        assert rc == 1
        assert "error:" in capsys.readouterr().err


class TestAblate:
    def test_grid_shape_and_summary(self, tmp_path, capsys):
        data = synth_tiny(tmp_path / "ds", wells=8, seed=2)
        capsys.readouterr()  # drop the synth status line
        out = tmp_path / "ablation.csv"
        rc = run([
            "ablate", "--data", data, "--markers", "M1", "--seeds", "1,2",
            "--mc-passes", 1, "--out", out, *TINY_NET,
            "--set", "max_epochs=1", "--set", "patience=1",
        ])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "mode,smoothing,seed,F1"
        assert len(lines) == 1 + 6 * 2  # 3 modes x 2 smoothing x 2 seeds
        summary = out.with_suffix(".summary.csv").read_text().splitlines()
        assert summary[0] == "mode,smoothing,mean_F1"
        assert len(summary) == 1 + 6
        assert len(capsys.readouterr().out.splitlines()) == 6


class TestHelp:
    @pytest.mark.parametrize("cmd", ["synth", "train", "predict", "eval", "ablate"])
    def test_help_lists_flags(self, cmd, capsys):
        with pytest.raises(SystemExit) as exc:
            main([cmd, "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        assert "--" in out and "default" in out.lower()
