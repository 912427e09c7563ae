"""Command-line interface: argument plumbing and exit codes."""

import numpy as np
import pytest

from imgskip.cli import build_parser, main
from imgskip.report import read_csv_log


def test_parser_has_all_subcommands():
    parser = build_parser()
    for cmd in ("denoise-dual", "denoise-huber", "deblur", "tomo", "report"):
        args = parser.parse_args([cmd] if cmd == "report" else [cmd]) \
            if cmd != "report" else parser.parse_args(["report", "x.csv"])
        assert args.command == cmd


def test_parser_rejects_unknown_algo():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["denoise-dual", "--algo", "nope"])


def run_cli(args):
    return main(args)


def test_denoise_run_writes_csv(tmp_path):
    out = tmp_path / "run.csv"
    code = run_cli([
        "denoise-dual", "--algo", "proxskip", "--p", "0.5",
        "--size", "16x16", "--iters", "60", "--ref-iters", "4000",
        "--cache-dir", str(tmp_path / "cache"), "--out", str(out),
    ])
    assert code == 0
    cols = read_csv_log(out)
    assert len(cols["iter"]) <= 60
    assert cols["prox_count"][-1] == sum(cols["prox_applied"])


def test_config_file_with_cli_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "algo = pgd\n"
        "size = 16x16\n"
        "iters = 30\n"
        f"cache_dir = {tmp_path / 'cache'}\n"
        "ref_iters = 4000\n"
    )
    out = tmp_path / "o.csv"
    code = run_cli(["denoise-dual", "--config", str(cfg),
                    "--algo", "fista", "--out", str(out)])
    assert code == 0
    cols = read_csv_log(out)
    # FISTA applies the prox every iteration.
    assert all(cols["prox_applied"])
    assert len(cols["iter"]) <= 30


def test_reference_rejection_exit_code(tmp_path):
    code = run_cli([
        "denoise-dual", "--algo", "pgd", "--size", "16x16",
        "--iters", "10", "--ref-iters", "20",
        "--cache-dir", str(tmp_path / "cache"),
    ])
    assert code == 3


@pytest.mark.filterwarnings("ignore:overflow")
def test_divergence_exit_code(tmp_path):
    # A grossly violated step-size rule makes gradient descent blow up.
    code = run_cli([
        "denoise-dual", "--algo", "gd", "--size", "16x16",
        "--gamma", "1e12", "--iters", "2000", "--ref-iters", "4000",
        "--cache-dir", str(tmp_path / "cache"),
    ])
    assert code == 2


def test_dump_image_flag(tmp_path):
    pfm = tmp_path / "u.pfm"
    code = run_cli([
        "denoise-dual", "--algo", "pgd", "--size", "16x16",
        "--iters", "20", "--ref-iters", "4000",
        "--cache-dir", str(tmp_path / "cache"), "--dump-image", str(pfm),
    ])
    assert code == 0
    from imgskip.imageio import read_pfm
    img = read_pfm(pfm)
    assert img.shape == (16, 16) and np.all(np.isfinite(img))


def test_report_subcommand(tmp_path):
    out = tmp_path / "run.csv"
    run_cli(["denoise-dual", "--algo", "pgd", "--size", "16x16",
             "--iters", "25", "--ref-iters", "4000",
             "--cache-dir", str(tmp_path / "cache"), "--out", str(out)])
    code = run_cli(["report", str(out), "--out-dir", str(tmp_path / "figs"),
                    "--labels", "pgd"])
    assert code == 0
    assert (tmp_path / "figs" / "error_vs_iter.png").exists()
