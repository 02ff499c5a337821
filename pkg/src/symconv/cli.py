"""Command-line interface: verification oracles, benchmarks, and training.

Subcommands::

    gradcheck   finite-difference check of packed-kernel gradients
    symcheck    randomized symmetry generation/preservation suites
    packbench   packed-vs-full equivalence, MAC and storage ratios
    train       train one network on the synthetic pairing task
    compare     CNN-vs-SCNN comparison over several seeds
    cartesian   lift a feature sequence to its pair tensor
    heatmap     export the output map of a trained network

Every subcommand writes its reports (and figures) under ``--out`` only, and
is deterministic given the config and seed: report files are byte-identical
across reruns.  Exit codes: 0 success, 1 numeric/assertion failure, 2 usage
or config error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import figures, harness, report
from .cartesian import pair_swap_check, self_cartesian
from .conv import relu_forward
from .errors import ConfigError, SymconvError
from .oracle import FdSpec, fd_gradient, worst_relative_error
from .packed import (
    OpMeter,
    full_feature_entries,
    pack,
    packed_entry_count,
    packed_sym_conv,
    packed_sym_gen_conv,
    storage_ratio,
    unpack,
)
from .symkernel import (
    new_gen_kernel,
    new_pres_kernel,
    sym_gen_layer_forward,
    sym_pres_layer_forward,
)
from .tensor import Rng, asymmetry, load_tensor, save_tensor

DEFAULT_CONFIG = """\
# network: kind:C:F:activation, comma separated
layers = gen:3:8:relu, pres:3:8:relu, pres:3:1:sigmoid
seed = 0
learning_rate = 0.002
pos_weight = 5
weight_decay = 1e-5
optimizer = adam
epochs = 30
batch_size = 10
# synthetic complementary-pairing task
task_length = 30
task_alphabet = 4
task_train = 200
task_val = 0
task_test = 50
task_min_sep = 3
trials = 5
"""

GEN_TOL = 1e-12
CHAIN_TOL = 1e-11
EQUIV_TOL = 1e-12
MAC_RATIO_LIMIT = 0.55


def parse_sizes(text):
    """Grid string like ``L=4,8;C=1,3;n=2`` into {key: [ints]}."""
    grid = {}
    if not text:
        return grid
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        key, sep, values = part.partition("=")
        if not sep:
            raise ConfigError(f"bad --sizes fragment {part!r}")
        try:
            grid[key.strip()] = [int(v) for v in values.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --sizes numbers in {part!r}") from exc
    return grid


def _load_configs(args):
    if args.config:
        net, task = harness.load_config(args.config)
    else:
        net, task = harness.configs_from_mapping(
            harness.parse_config_text(DEFAULT_CONFIG)
        )
    if args.seed is not None:
        net = replace(net, seed=args.seed)
    return net, task


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _random_symmetric_label(rng, length, min_sep=1):
    upper = np.triu(np.asarray(rng.uniform_signed((length, length))) > 0.0, k=max(1, min_sep))
    label = upper.astype(np.float64)
    return label + label.T


# ---------------------------------------------------------------------------
# gradcheck


def _gradcheck_case(rng, length, size, half_channels, out_channels, spec):
    """Worst relative FD error per kernel kind for one two-layer pipeline."""
    cfg = harness.NetworkConfig(
        layers=(
            harness.LayerSpec(harness.SYM_GENERATING, size, out_channels, "relu"),
            harness.LayerSpec(harness.SYM_PRESERVING, size, 1, "sigmoid"),
        ),
        n=half_channels,
        min_sep=1,
    ).validate()
    params = harness.init_network(cfg, rng)
    x = np.asarray(rng.uniform_signed((length, half_channels)))
    label = _random_symmetric_label(rng, length)

    prob_map, caches = harness._forward_cached(cfg, params, x)
    _, d_map = harness._loss_with_grad(prob_map, label, length, cfg.pos_weight, cfg.min_sep)
    analytic = harness._backward(cfg, params, caches, d_map, length)

    def loss_with(layer_idx, array, use_bias):
        kernel = params[layer_idx]
        patched = kernel.with_params(
            array if not use_bias else kernel.packed,
            bias=array if use_bias else kernel.bias,
        )
        trial = list(params)
        trial[layer_idx] = patched
        return harness.network_loss(cfg, trial, x, label)

    worst = {"gen": 0.0, "pres": 0.0}
    for idx, kind in ((0, "gen"), (1, "pres")):
        for use_bias in (False, True):
            base = params[idx].bias if use_bias else params[idx].packed
            numeric = fd_gradient(lambda a: loss_with(idx, a, use_bias), base.copy(), spec)
            analytic_part = analytic[idx][1] if use_bias else analytic[idx][0]
            worst[kind] = max(worst[kind], worst_relative_error(analytic_part, numeric, spec))
    return worst, (x, label, params)


def cmd_gradcheck(args):
    out = _outdir(args)
    grid = parse_sizes(args.sizes)
    lengths = grid.get("L", [4, 6])
    sizes = grid.get("C", [1, 3])
    halves = grid.get("n", [2])
    channels = grid.get("F", [2])
    seed = args.seed if args.seed is not None else 0
    spec = FdSpec()

    lines = []
    overall = {"gen": 0.0, "pres": 0.0}
    failed_dump = None
    case = 0
    for length in lengths:
        for size in sizes:
            for half in halves:
                for out_ch in channels:
                    rng = Rng(seed + case)
                    worst, instance = _gradcheck_case(rng, length, size, half, out_ch, spec)
                    lines.append(
                        f"case={case} L={length} C={size} n={half} F={out_ch} "
                        f"gen={report.fmt(worst['gen'])} pres={report.fmt(worst['pres'])}"
                    )
                    for kind in overall:
                        overall[kind] = max(overall[kind], worst[kind])
                    if max(worst.values()) > spec.rel_tol and failed_dump is None:
                        failed_dump = (case, instance)
                    case += 1

    ok = all(v <= spec.rel_tol for v in overall.values())
    lines.append(f"worst_gen={report.fmt(overall['gen'])}")
    lines.append(f"worst_pres={report.fmt(overall['pres'])}")
    lines.append(f"tolerance={report.fmt(spec.rel_tol)}")
    lines.append(f"status={'PASS' if ok else 'FAIL'}")
    report.write_lines(out / "gradcheck.txt", lines)
    print("\n".join(lines[-4:]))

    if failed_dump is not None:
        case_id, (x, label, params) = failed_dump
        save_tensor(out / f"failing_case_{case_id}_input.sct", x)
        save_tensor(out / f"failing_case_{case_id}_label.sct", label)
        for idx, kernel in enumerate(params):
            save_tensor(out / f"failing_case_{case_id}_layer{idx}_packed.sct", kernel.packed)
            save_tensor(out / f"failing_case_{case_id}_layer{idx}_bias.sct", kernel.bias)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# symcheck


def cmd_symcheck(args):
    out = _outdir(args)
    grid = parse_sizes(args.sizes)
    lengths = grid.get("L", list(range(1, 11)))
    sizes = grid.get("C", [1, 3, 5])
    halves = grid.get("n", [1, 2, 3, 4])
    channels = grid.get("F", [1, 2, 3, 4])
    depths = grid.get("depth", [1, 2, 3, 4])
    seed = args.seed if args.seed is not None else 0

    rng = Rng(seed)
    gen_cases = 0
    worst_gen = 0.0
    worst_swap = 0.0
    for length in lengths:
        for size in sizes:
            for half in halves:
                for out_ch in channels:
                    x = np.asarray(rng.uniform_signed((length, half)))
                    lifted = self_cartesian(x)
                    worst_swap = max(worst_swap, pair_swap_check(lifted))
                    kernel = new_gen_kernel(rng, size, half, out_ch)
                    worst_gen = max(worst_gen, asymmetry(sym_gen_layer_forward(lifted, kernel)))
                    gen_cases += 1

    chain_cases = 0
    worst_chain = 0.0
    for depth in depths:
        for _ in range(25):
            length = int(rng.integers(2, 9))
            width = int(rng.integers(1, 4))
            x = np.asarray(rng.uniform_signed((length, width)))
            gen_kernel = new_gen_kernel(rng, 3, width, int(rng.integers(1, 4)))
            current = relu_forward(sym_gen_layer_forward(self_cartesian(x), gen_kernel))
            for _ in range(depth):
                out_ch = int(rng.integers(1, 4))
                kernel = new_pres_kernel(rng, 3, current.shape[2], out_ch)
                current = relu_forward(sym_pres_layer_forward(current, kernel, check=False))
            worst_chain = max(worst_chain, asymmetry(current))
            chain_cases += 1

    ok = worst_gen <= GEN_TOL and worst_chain <= CHAIN_TOL and worst_swap == 0.0
    lines = [
        f"generating_cases={gen_cases}",
        f"worst_generating_asymmetry={report.fmt(worst_gen)}",
        f"generating_tolerance={report.fmt(GEN_TOL)}",
        f"chain_cases={chain_cases}",
        f"worst_chain_asymmetry={report.fmt(worst_chain)}",
        f"chain_tolerance={report.fmt(CHAIN_TOL)}",
        f"worst_pair_swap_check={report.fmt(worst_swap)}",
        f"status={'PASS' if ok else 'FAIL'}",
    ]
    report.write_lines(out / "symcheck.txt", lines)
    print("\n".join(lines))
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# packbench


def cmd_packbench(args):
    out = _outdir(args)
    grid = parse_sizes(args.sizes)
    lengths = grid.get("L", [4, 16, 32, 64])
    size = grid.get("C", [3])[0]
    width = grid.get("m", [3])[0]
    out_ch = grid.get("F", [2])[0]
    seed = args.seed if args.seed is not None else 0
    rng = Rng(seed)

    lines = [f"C={size} m={width} F={out_ch}"]
    ok = True
    for length in lengths:
        base = np.asarray(rng.uniform_signed((length, length, width)))
        symmetric = (base + np.swapaxes(base, 0, 1)) / 2.0
        packed_in = pack(symmetric)
        kernel = new_pres_kernel(rng, size, width, out_ch)

        meter = OpMeter()
        t0 = time.perf_counter()
        packed_out = packed_sym_conv(packed_in, kernel, meter)
        packed_secs = time.perf_counter() - t0

        t0 = time.perf_counter()
        full_out = sym_pres_layer_forward(unpack(packed_in), kernel, check=False)
        full_secs = time.perf_counter() - t0
        diff = float(np.max(np.abs(unpack(packed_out) - full_out)))

        full_macs = length * length * size * size * width * out_ch
        mac_ratio = meter.macs / full_macs
        enumerated = packed_entry_count(length) / (length * length)
        closed_form = storage_ratio(length)

        gen_half = max(1, width // 2)
        gen_kernel = new_gen_kernel(rng, size, gen_half, out_ch)
        gen_meter = OpMeter()
        packed_sym_gen_conv(
            np.asarray(rng.uniform_signed((length, gen_half))), gen_kernel, gen_meter
        )
        mem_ratio = gen_meter.feature_peak / full_feature_entries(
            length, 2 * gen_half, out_ch
        )

        ok &= diff <= EQUIV_TOL and enumerated == closed_form
        if length >= 32:
            ok &= mac_ratio <= MAC_RATIO_LIMIT
        lines.append(
            f"L={length} storage_ratio={report.fmt(closed_form)} "
            f"mac_ratio={report.fmt(mac_ratio)} equivalence={report.fmt(diff)} "
            f"gen_memory_ratio={report.fmt(mem_ratio)}"
        )
        print(
            f"L={length}: packed {packed_secs * 1e3:.2f} ms, "
            f"full {full_secs * 1e3:.2f} ms (wall-clock, not in report)"
        )
    lines.append(f"status={'PASS' if ok else 'FAIL'}")
    report.write_lines(out / "packbench.txt", lines)
    print("\n".join(lines))
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# train / compare / heatmap / cartesian


def _build_dataset(task, seed):
    return harness.make_dataset(Rng(seed), task)


def _epoch_rows(result):
    rows = []
    for epoch, (loss, metrics) in enumerate(
        zip(result.epoch_losses, result.epoch_metrics), start=1
    ):
        rows.append((epoch, loss, metrics.ppv, metrics.sensitivity, metrics.accuracy))
    return rows


def cmd_train(args):
    out = _outdir(args)
    cfg, task = _load_configs(args)
    dataset = _build_dataset(task, cfg.seed)
    result = harness.train(cfg, dataset)

    report.write_csv(out / "epochs.csv", ("epoch", "loss", "ppv", "sen", "acc"), _epoch_rows(result))
    summary = {
        "seed": cfg.seed,
        "epochs": cfg.epochs,
        "optimizer": cfg.optimizer,
        "parameters": harness.count_parameters(result.params),
        "metrics": {
            name: report.metrics_dict(metrics) for name, metrics in result.metrics.items()
        },
    }
    report.write_json(out / "summary.json", summary)
    if result.epoch_losses:
        figures.save_loss_curve(out / "loss_curve.png", result.epoch_losses)
    for name, metrics in result.metrics.items():
        print(
            f"{name}: ppv={metrics.ppv:.4f} sen={metrics.sensitivity:.4f} "
            f"acc={metrics.accuracy:.4f}"
        )
    return 0


def cmd_compare(args):
    out = _outdir(args)
    cfg, task = _load_configs(args)
    if not cfg.is_symmetric:
        raise ConfigError("compare expects a config whose first layer is sym_generating")
    cnn_cfg = harness.standard_twin(cfg)
    dataset = _build_dataset(task, cfg.seed)
    comparison = harness.compare_cnn_scnn(cnn_cfg, cfg, dataset, task.trials)

    rows = []
    for trial, seed in enumerate(comparison.seeds):
        for model, metrics in (
            ("cnn", comparison.cnn_trials[trial]),
            ("scnn", comparison.scnn_trials[trial]),
        ):
            rows.append((trial, seed, model, metrics.ppv, metrics.sensitivity, metrics.accuracy))
    report.write_csv(
        out / "compare_trials.csv", ("trial", "seed", "model", "ppv", "sen", "acc"), rows
    )
    summary = {
        "seeds": list(comparison.seeds),
        "parameters": {"cnn": comparison.cnn_params, "scnn": comparison.scnn_params},
        "cnn": {"mean": comparison.cnn_mean, "sd": comparison.cnn_sd},
        "scnn": {"mean": comparison.scnn_mean, "sd": comparison.scnn_sd},
    }
    report.write_json(out / "compare_summary.json", summary)
    figures.save_comparison(
        out / "compare.png",
        comparison.cnn_mean,
        comparison.cnn_sd,
        comparison.scnn_mean,
        comparison.scnn_sd,
    )
    print(
        f"params: cnn={comparison.cnn_params['total']} scnn={comparison.scnn_params['total']}"
    )
    print(f"mean acc: cnn={comparison.cnn_mean['acc']:.4f} scnn={comparison.scnn_mean['acc']:.4f}")
    if comparison.scnn_params["total"] >= comparison.cnn_params["total"]:
        print("error: SCNN does not use fewer parameters", file=sys.stderr)
        return 1
    return 0


def cmd_cartesian(args):
    out = _outdir(args)
    if args.input:
        x = load_tensor(args.input)
    else:
        grid = parse_sizes(args.sizes)
        length = grid.get("L", [6])[0]
        width = grid.get("n", [2])[0]
        rng = Rng(args.seed if args.seed is not None else 0)
        x = np.asarray(rng.uniform_signed((length, width)))
        save_tensor(out / "sequence.sct", x)
    lifted = self_cartesian(x)
    save_tensor(out / "pair_tensor.sct", lifted)
    swap = pair_swap_check(lifted)
    lines = [
        f"sequence_shape={'x'.join(str(s) for s in x.shape)}",
        f"pair_shape={'x'.join(str(s) for s in lifted.shape)}",
        f"pair_swap_check={report.fmt(swap)}",
    ]
    report.write_lines(out / "cartesian.txt", lines)
    print("\n".join(lines))
    return 0 if swap <= GEN_TOL else 1


def cmd_heatmap(args):
    out = _outdir(args)
    cfg, task = _load_configs(args)
    dataset = _build_dataset(task, cfg.seed)
    result = harness.train(cfg, dataset)
    items = dataset.test if dataset.test else dataset.train
    x, _ = items[0]
    prob_map = harness.forward_network(cfg, result.params, x)[:, :, 0]
    report.write_matrix_csv(out / "heatmap.csv", prob_map)
    figures.save_heatmap(out / "heatmap.png", prob_map)
    print(f"heatmap asymmetry: {asymmetry(prob_map):.3e}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="symconv",
        description="Symmetry-structured convolution checks, benchmarks, and training",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text, config=False, sizes=False, input_file=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", required=True, help="directory for all outputs")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        if config:
            p.add_argument("--config", default=None, help="key=value config file")
        if sizes:
            p.add_argument("--sizes", default=None, help='grid like "L=4,8;C=1,3;n=2;F=2"')
        if input_file:
            p.add_argument("--input", default=None, help="SCT1 input tensor")
        p.set_defaults(handler=handler)
        return p

    add("gradcheck", cmd_gradcheck, "finite-difference gradient verification", sizes=True)
    add("symcheck", cmd_symcheck, "randomized symmetry suites", sizes=True)
    add("packbench", cmd_packbench, "packed storage/compute benchmarks", sizes=True)
    add("train", cmd_train, "train on the synthetic pairing task", config=True)
    add("compare", cmd_compare, "CNN vs SCNN comparison", config=True)
    add("cartesian", cmd_cartesian, "pair-tensor lift of a sequence", sizes=True, input_file=True)
    add("heatmap", cmd_heatmap, "export a trained network's output map", config=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SymconvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
