#!/usr/bin/env python3
"""End-to-end tests of the igkit command-line tool.

Environment: IGKIT (binary), IGKIT_TRAIN, IGKIT_VAL (image dirs),
IGKIT_WORK (scratch dir), IGKIT_ORACLE (bicubic_baseline.py).
"""
import csv
import hashlib
import io
import os
import shutil
import subprocess
import sys
import unittest

from PIL import Image

BIN = os.environ["IGKIT"]
TRAIN = os.environ["IGKIT_TRAIN"]
VAL = os.environ["IGKIT_VAL"]
WORK = os.environ["IGKIT_WORK"]
ORACLE = os.environ["IGKIT_ORACLE"]

# Small model so the end-to-end runs stay quick.
SMALL = ["--set", "c_e=8", "--set", "blocks=1", "--set", "patch_size=16"]


def run(*args, check=None):
    p = subprocess.run([BIN, *args], capture_output=True, text=True)
    if check is not None and p.returncode != check:
        raise AssertionError(f"{args}: exit {p.returncode}, want {check}\n{p.stdout}\n{p.stderr}")
    return p


def sha(path):
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


def image_size(p):
    with Image.open(p) as img:
        return img.size


def path(*parts):
    return os.path.join(WORK, *parts)


def setUpModule():
    shutil.rmtree(WORK, ignore_errors=True)
    os.makedirs(WORK)
    first = sorted(f for f in os.listdir(VAL) if f.endswith(".png"))[0]
    with Image.open(os.path.join(VAL, first)) as img:
        img.convert("RGB").crop((0, 0, 64, 64)).save(path("in64.png"))
    run("train", "--data", TRAIN, "--out", path("base"), "--seed", "3", "--iterations", "4", *SMALL, check=0)


class Train(unittest.TestCase):
    def test_zero_iterations_writes_initial_checkpoint(self):
        run("train", "--data", TRAIN, "--out", path("zero"), "--iterations", "0", *SMALL, check=0)
        self.assertTrue(os.path.exists(path("zero", "final.ckpt")))

    def test_log_rows_cycle_through_scales(self):
        with open(path("cfg.txt"), "w") as f:
            f.write("scales = [2, 3, 4]\npatch_size = 48\niterations = 12\nc_e = 8\nblocks = 1\n")
        run("train", "--config", path("cfg.txt"), "--data", TRAIN, "--out", path("cycle"), "--seed", "1", check=0)
        with open(path("cycle", "log.csv")) as f:
            rows = list(csv.DictReader(f))
        self.assertEqual(len(rows), 24)  # two sub-batches per step
        self.assertEqual({int(r["scale"]) for r in rows}, {2, 3, 4})

    def test_identical_runs_hash_equal(self):
        for name in ("det_a", "det_b"):
            run("train", "--data", TRAIN, "--out", path(name), "--seed", "9", "--iterations", "3", *SMALL, check=0)
        self.assertEqual(sha(path("det_a", "final.ckpt")), sha(path("det_b", "final.ckpt")))

    def test_bad_config_is_usage_error(self):
        p = run("train", "--data", TRAIN, "--out", path("bad"), "--set", "batch=5", check=2)
        self.assertIn("batch", p.stderr)
        run("train", "--data", TRAIN, "--out", path("bad"), "--set", "nonsense=1", check=2)

    def test_missing_data_is_usage_error(self):
        run("train", "--data", path("nowhere"), "--out", path("bad2"), check=2)


class Instantiate(unittest.TestCase):
    def test_three_scales(self):
        p = run("instantiate", "--ckpt", path("base", "final.ckpt"), "--scales", "2,3,4", "--out", path("b234.bank"),
                check=0)
        for r in (2, 3, 4):
            self.assertIn(f"x{r}", p.stdout)

    def test_scale_eight(self):
        run("instantiate", "--ckpt", path("base", "final.ckpt"), "--scales", "8", "--out", path("b8.bank"), check=0)

    def test_bad_scale_list(self):
        run("instantiate", "--ckpt", path("base", "final.ckpt"), "--scales", "2,x", "--out", path("bx.bank"), check=2)


class Infer(unittest.TestCase):
    def test_scale_four_output_size(self):
        run("infer", "--ckpt", path("base", "final.ckpt"), "--in", path("in64.png"), "--scale", "4",
            "--out", path("x4.png"), check=0)
        self.assertEqual(image_size(path("x4.png")), (256, 256))

    def test_repeated_inference_is_byte_identical(self):
        for name in ("rep_a.png", "rep_b.png"):
            run("infer", "--ckpt", path("base", "final.ckpt"), "--in", path("in64.png"), "--scale", "3",
                "--out", path(name), check=0)
        self.assertEqual(sha(path("rep_a.png")), sha(path("rep_b.png")))

    def test_bank_matches_checkpoint_bytes(self):
        run("instantiate", "--ckpt", path("base", "final.ckpt"), "--scales", "2", "--out", path("b2.bank"), check=0)
        run("infer", "--bank", path("b2.bank"), "--in", path("in64.png"), "--scale", "2", "--out", path("bank.png"),
            check=0)
        run("infer", "--ckpt", path("base", "final.ckpt"), "--in", path("in64.png"), "--scale", "2",
            "--out", path("ckpt.png"), check=0)
        self.assertEqual(sha(path("bank.png")), sha(path("ckpt.png")))

    def test_fractional_scale_takes_ceiling_path(self):
        p = run("infer", "--ckpt", path("base", "final.ckpt"), "--in", path("in64.png"), "--scale", "2.5",
                "--out", path("x25.png"), check=0)
        self.assertIn("x3", p.stdout + p.stderr)
        self.assertEqual(image_size(path("x25.png")), (160, 160))

    def test_bank_lacking_scale_is_contract_error(self):
        run("instantiate", "--ckpt", path("base", "final.ckpt"), "--scales", "2", "--out", path("only2.bank"),
            check=0)
        run("infer", "--bank", path("only2.bank"), "--in", path("in64.png"), "--scale", "3", "--out", path("no.png"),
            check=3)

    def test_unreadable_input_is_usage_error(self):
        with open(path("junk.png"), "w") as f:
            f.write("junk")
        run("infer", "--ckpt", path("base", "final.ckpt"), "--in", path("junk.png"), "--scale", "2",
            "--out", path("junk_out.png"), check=2)


class Eval(unittest.TestCase):
    def test_bicubic_column_matches_standalone_oracle(self):
        run("eval", "--ckpt", path("base", "final.ckpt"), "--data", VAL, "--scales", "2,3,4",
            "--csv", path("eval.csv"), check=0)
        with open(path("eval.csv")) as f:
            ours = {int(r["scale"]): float(r["bicubic_psnr_y"]) for r in csv.DictReader(f)}
        out = subprocess.run([sys.executable, ORACLE, VAL, "2,3,4"], capture_output=True, text=True, check=True)
        ref = {int(r["scale"]): float(r["bicubic_psnr_y"]) for r in csv.DictReader(io.StringIO(out.stdout))}
        for r in (2, 3, 4):
            self.assertLessEqual(abs(ours[r] - ref[r]), 1e-6, f"x{r}: {ours[r]} vs {ref[r]}")

    def test_passthrough_identity_is_infinite(self):
        p = run("eval", "--ckpt", path("base", "final.ckpt"), "--data", VAL, "--scales", "1", "--passthrough",
                "--csv", path("pass.csv"), check=0)
        with open(path("pass.csv")) as f:
            row = next(csv.DictReader(f))
        self.assertEqual(float(row["psnr_y"]), float("inf"))


class Tools(unittest.TestCase):
    def test_selftest(self):
        p = run("selftest", check=0)
        self.assertIn("passed", p.stdout)

    def test_bench_small(self):
        run("bench", "--variants", "igconv_plus,spconv_plus", "--scales", "2", "--c-e", "8", "--out-h", "32",
            "--out-w", "32", "--csv", path("bench.csv"), check=0)
        with open(path("bench.csv")) as f:
            self.assertEqual(len(list(csv.DictReader(f))), 2)

    def test_bench_rejects_few_trials(self):
        run("bench", "--trials", "3", check=2)

    def test_atlas_is_deterministic(self):
        for name in ("atlas_a.png", "atlas_b.png"):
            run("atlas", "--c-e", "4", "--seed", "2", "--scales", "2,3,4,32", "--out", path(name), check=0)
        self.assertEqual(sha(path("atlas_a.png")), sha(path("atlas_b.png")))

    def test_cka_of_checkpoint_with_itself(self):
        ck = path("base", "final.ckpt")
        run("cka", "--ckpt", ck, "--ckpt", ck, "--probes", VAL, "--count", "2", "--size", "24",
            "--csv", path("cka.csv"), check=0)
        with open(path("cka.csv")) as f:
            rows = list(csv.reader(f))
        values = [float(v) for row in rows[1:] for v in row[1:]]
        self.assertTrue(values and all(abs(v - 1.0) < 1e-9 for v in values), rows)

    def test_unknown_subcommand(self):
        run("frobnicate", check=2)
        run(check=2)


if __name__ == "__main__":
    unittest.main(verbosity=2)
