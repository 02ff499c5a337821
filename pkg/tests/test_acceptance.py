"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.  The comparative experiment (criterion 7) trains
twenty small networks and dominates the runtime.
"""

import itertools
import time

import numpy as np
import pytest

from symconv import (
    FdSpec,
    Rng,
    adam_step,
    brute_force_expand_count,
    count_parameters,
    expand_gen,
    expand_pres,
    fd_gradient,
    forward_network,
    init_network,
    make_dataset,
    new_gen_kernel,
    new_pres_kernel,
    pack,
    packed_sym_conv,
    packed_sym_gen_conv,
    relu_forward,
    self_cartesian,
    sgd_step,
    standard_twin,
    storage_ratio,
    sym_gen_layer_forward,
    sym_layer_backward,
    sym_pres_layer_forward,
    train,
    transpose_spatial,
    unpack,
    worst_relative_error,
)
from symconv.cli import main
from symconv.harness import (
    LayerSpec,
    NetworkConfig,
    TaskConfig,
    _backward,
    _forward_cached,
    _loss_with_grad,
    compare_cnn_scnn,
    network_loss,
    parse_layer_list,
)
from symconv.packed import OpMeter, packed_entry_count

GRID_L = range(1, 11)
GRID_C = (1, 3, 5)
GRID_N = range(1, 5)
GRID_F = range(1, 5)


def _report(criterion, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def _symmetric_tensor(rng, length, channels):
    base = np.asarray(rng.uniform_signed((length, length, channels)))
    return (base + transpose_spatial(base)) / 2.0


def _symmetric_label(rng, length, min_sep=1):
    upper = np.triu(np.asarray(rng.uniform_signed((length, length))) > 0, k=max(1, min_sep))
    label = upper.astype(np.float64)
    return label + label.T


def test_criterion_1_symmetry_generation():
    start = time.perf_counter()
    rng = Rng(101)
    worst = 0.0
    cases = 0
    for length, size, half, out in itertools.product(GRID_L, GRID_C, GRID_N, GRID_F):
        x = np.asarray(rng.uniform_signed((length, half)))
        kernel = new_gen_kernel(rng, size, half, out)
        z = sym_gen_layer_forward(self_cartesian(x), kernel)
        worst = max(worst, float(np.max(np.abs(z - transpose_spatial(z)))))
        cases += 1
    elapsed = time.perf_counter() - start
    ok = cases >= 200 and worst <= 1e-12 and elapsed < 10.0
    _report(1, ok, f"{cases} instances, worst asymmetry {worst:.3e}, {elapsed:.1f}s")


def test_criterion_2_symmetry_preservation():
    start = time.perf_counter()
    rng = Rng(202)
    worst = 0.0
    cases = 0
    for depth in (1, 2, 3, 4):
        for _ in range(30):
            length = int(rng.integers(2, 11))
            channels = int(rng.integers(1, 5))
            current = _symmetric_tensor(rng, length, channels)
            for _ in range(depth):
                out = int(rng.integers(1, 5))
                size = (1, 3)[int(rng.integers(0, 2))]
                kernel = new_pres_kernel(rng, size, current.shape[2], out)
                current = relu_forward(sym_pres_layer_forward(current, kernel, check=False))
            worst = max(worst, float(np.max(np.abs(current - transpose_spatial(current)))))
            cases += 1
    elapsed = time.perf_counter() - start
    ok = cases >= 100 and worst <= 1e-11 and elapsed < 10.0
    _report(2, ok, f"{cases} chains (depth<=4), worst asymmetry {worst:.3e}, {elapsed:.1f}s")


def test_criterion_3_gradient_correctness():
    start = time.perf_counter()
    spec = FdSpec()
    worst = 0.0
    cases = 0

    # single symmetric layers against a random linear functional
    rng = Rng(303)
    for size, channels in itertools.product((1, 3), (1, 2)):
        for kind in ("gen", "pres"):
            for _ in range(4):
                length = int(rng.integers(3, 7))
                if kind == "gen":
                    kernel = new_gen_kernel(rng, size, channels, 2)
                    layer_in = self_cartesian(np.asarray(rng.uniform_signed((length, channels))))
                    fwd = lambda k: sym_gen_layer_forward(layer_in, k)
                else:
                    kernel = new_pres_kernel(rng, size, channels, 2)
                    layer_in = _symmetric_tensor(rng, length, channels)
                    fwd = lambda k: sym_pres_layer_forward(layer_in, k, check=False)
                upstream = np.asarray(rng.uniform_signed((length, length, 2)))
                d_packed, d_bias, _ = sym_layer_backward(layer_in, kernel, upstream)

                def packed_loss(packed):
                    return float(np.sum(upstream * fwd(kernel.with_params(packed))))

                def bias_loss(bias):
                    return float(np.sum(upstream * fwd(kernel.with_params(kernel.packed, bias=bias))))

                worst = max(
                    worst,
                    worst_relative_error(d_packed, fd_gradient(packed_loss, kernel.packed.copy(), spec), spec),
                    worst_relative_error(d_bias, fd_gradient(bias_loss, kernel.bias.copy(), spec), spec),
                )
                cases += 1

    # full pipelines: lift -> generating conv -> ReLU -> preserving conv
    # -> sigmoid -> weighted upper-triangle BCE
    for pipeline in range(24):
        rng = Rng(9000 + pipeline)
        length = int(rng.integers(4, 7))
        size = (1, 3)[int(rng.integers(0, 2))]
        half = int(rng.integers(1, 3))
        out = int(rng.integers(1, 3))
        cfg = NetworkConfig(
            layers=(
                LayerSpec("sym_generating", size, out, "relu"),
                LayerSpec("sym_preserving", size, 1, "sigmoid"),
            ),
            n=half,
            min_sep=1,
        ).validate()
        params = init_network(cfg, rng)
        x = np.asarray(rng.uniform_signed((length, half)))
        label = _symmetric_label(rng, length)
        prob, caches = _forward_cached(cfg, params, x)
        _, d_map = _loss_with_grad(prob, label, length, cfg.pos_weight, cfg.min_sep)
        analytic = _backward(cfg, params, caches, d_map, length)
        for idx in (0, 1):
            def packed_loss(packed, idx=idx):
                trial = list(params)
                trial[idx] = params[idx].with_params(packed)
                return network_loss(cfg, trial, x, label)

            numeric = fd_gradient(packed_loss, params[idx].packed.copy(), spec)
            worst = max(worst, worst_relative_error(analytic[idx][0], numeric, spec))
        cases += 1

    elapsed = time.perf_counter() - start
    ok = cases >= 50 and worst <= spec.rel_tol and elapsed < 60.0
    _report(3, ok, f"{cases} instances, worst rel err {worst:.3e} (tol 1e-5), {elapsed:.1f}s")


def test_criterion_4_training_closure():
    start = time.perf_counter()
    rng = Rng(404)
    ok = True
    for optimizer in ("sgd", "adam"):
        gen = new_gen_kernel(rng, 3, 3, 2)
        pres = new_pres_kernel(rng, 3, 2, 2)
        arrays = [gen.packed, gen.bias, pres.packed, pres.bias]
        state = None
        for _ in range(100):
            grads = [np.asarray(rng.uniform_signed(a.shape)) for a in arrays]
            if optimizer == "sgd":
                arrays = sgd_step(arrays, grads, 0.01, weight_decay=1e-5)
            else:
                state, arrays = adam_step(state, arrays, grads, 0.01)
        gen = gen.with_params(arrays[0], bias=arrays[1])
        pres = pres.with_params(arrays[2], bias=arrays[3])
        w = expand_gen(gen).weights
        q = expand_pres(pres).weights
        ok &= np.array_equal(w, np.swapaxes(w, 0, 1))
        ok &= np.array_equal(w[:, :, :3, :], w[:, :, 3:, :])
        ok &= np.array_equal(q, np.swapaxes(q, 0, 1))
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 30.0
    _report(4, ok, f"100 SGD + 100 Adam steps keep both predicates bit-exact, {elapsed:.1f}s")


def test_criterion_5_parameter_counts():
    start = time.perf_counter()
    ok = True
    for size, channels, out in itertools.product(GRID_C, GRID_N, GRID_F):
        stored, full = brute_force_expand_count("gen", size, channels, out)
        ok &= stored == size * (size + 1) * channels * out // 2
        ok &= full == size * size * 2 * channels * out
        stored, full = brute_force_expand_count("pres", size, channels, out)
        ok &= stored == size * (size + 1) * channels * out // 2
        ok &= full == size * size * channels * out

    layers = parse_layer_list("gen:3:8:relu, pres:3:8:relu, pres:3:1:sigmoid")
    scnn_cfg = NetworkConfig(layers=layers, n=4).validate()
    scnn = count_parameters(init_network(scnn_cfg, Rng(0)))
    cnn = count_parameters(init_network(standard_twin(scnn_cfg), Rng(0)))
    ok &= scnn["total"] < cnn["total"]
    elapsed = time.perf_counter() - start
    _report(
        5,
        ok,
        f"grid counts match C(C+1)nF/2 and C(C+1)mF/2; "
        f"SCNN {scnn['total']} < CNN {cnn['total']} params, {elapsed:.1f}s",
    )


def test_criterion_6_packed_equivalence_and_savings():
    start = time.perf_counter()
    rng = Rng(606)
    worst = 0.0
    cases = 0
    for length, size, channels in itertools.product((1, 2, 4, 8, 12, 16), GRID_C, (1, 2, 4)):
        z = _symmetric_tensor(rng, length, channels)
        kernel = new_pres_kernel(rng, size, channels, 2)
        packed_out = packed_sym_conv(pack(z), kernel)
        reference = sym_pres_layer_forward(z, kernel, check=False)
        worst = max(worst, float(np.max(np.abs(unpack(packed_out) - reference))))
        cases += 1

        half = max(1, channels // 2)
        x = np.asarray(rng.uniform_signed((length, half)))
        gen_kernel = new_gen_kernel(rng, size, half, 2)
        gen_packed = packed_sym_gen_conv(x, gen_kernel)
        gen_reference = sym_gen_layer_forward(self_cartesian(x), gen_kernel)
        worst = max(worst, float(np.max(np.abs(unpack(gen_packed) - gen_reference))))
        cases += 1

    ratios_exact = all(
        packed_entry_count(length) / (length * length) == storage_ratio(length)
        for length in (4, 16, 64, 256)
    )

    mac_ratios = []
    for length in (32, 48):
        z = _symmetric_tensor(rng, length, 3)
        kernel = new_pres_kernel(rng, 3, 3, 2)
        meter = OpMeter()
        packed_sym_conv(pack(z), kernel, meter)
        mac_ratios.append(meter.macs / (length * length * 9 * 3 * 2))
    mac_ok = all(ratio <= 0.55 for ratio in mac_ratios)

    elapsed = time.perf_counter() - start
    ok = cases >= 100 and worst <= 1e-12 and ratios_exact and mac_ok and elapsed < 60.0
    _report(
        6,
        ok,
        f"{cases} equivalence cases worst {worst:.2e}; storage ratio exact; "
        f"MAC ratios {[f'{r:.4f}' for r in mac_ratios]} <= 0.55, {elapsed:.1f}s",
    )


def test_criterion_7_comparative_toy_experiment():
    start = time.perf_counter()
    layers = parse_layer_list("gen:3:8:relu, pres:3:8:relu, pres:3:1:sigmoid")
    scnn_cfg = NetworkConfig(layers=layers, n=4, seed=100, epochs=20, min_sep=3).validate()
    cnn_cfg = standard_twin(scnn_cfg)

    task = TaskConfig(length=30, alphabet=4, train_size=200, val_size=0, test_size=50, min_sep=3)
    dataset = make_dataset(Rng(scnn_cfg.seed), task)
    comparison = compare_cnn_scnn(cnn_cfg, scnn_cfg, dataset, trials=5)
    acc_ok = comparison.scnn_mean["acc"] >= comparison.cnn_mean["acc"] - 0.02
    kernel_ratio = comparison.scnn_params["kernel"] / comparison.cnn_params["kernel"]

    memo_task = TaskConfig(length=30, alphabet=4, train_size=20, val_size=0, test_size=0, min_sep=3)
    memo_data = make_dataset(Rng(7), memo_task)
    memo_cfg = NetworkConfig(layers=layers, n=4, seed=7, epochs=150, min_sep=3).validate()
    scnn_memo = train(memo_cfg, memo_data).metrics["train"].accuracy
    cnn_memo = train(standard_twin(memo_cfg), memo_data).metrics["train"].accuracy

    elapsed = time.perf_counter() - start
    ok = (
        acc_ok
        and kernel_ratio <= 0.7
        and scnn_memo >= 0.9
        and cnn_memo >= 0.9
        and elapsed < 600.0
    )
    _report(
        7,
        ok,
        f"test acc scnn {comparison.scnn_mean['acc']:.4f} vs cnn "
        f"{comparison.cnn_mean['acc']:.4f} (margin 0.02); kernel ratio "
        f"{kernel_ratio:.3f} <= 0.7; memorization scnn {scnn_memo:.3f} / cnn "
        f"{cnn_memo:.3f} >= 0.9; {elapsed:.0f}s",
    )


def test_criterion_8_cli_determinism(tmp_path):
    start = time.perf_counter()
    config = tmp_path / "accept.cfg"
    config.write_text(
        "layers = gen:3:4:relu, pres:3:4:relu, pres:3:1:sigmoid\n"
        "seed = 5\nepochs = 2\nbatch_size = 4\n"
        "task_length = 10\ntask_train = 6\ntask_val = 3\ntask_test = 3\n"
        "task_min_sep = 3\ntrials = 2\n"
    )
    seq = tmp_path / "seq.sct"
    from symconv import save_tensor

    save_tensor(seq, np.arange(10.0).reshape(5, 2))

    invocations = {
        "gradcheck": ["gradcheck", "--seed", "1", "--sizes", "L=4;C=1,3;n=2;F=2"],
        "symcheck": ["symcheck", "--seed", "1", "--sizes", "L=3,5;C=1,3;n=1,2;F=2;depth=1,2"],
        "packbench": ["packbench", "--seed", "2", "--sizes", "L=4,8"],
        "train": ["train", "--config", str(config)],
        "compare": ["compare", "--config", str(config)],
        "cartesian": ["cartesian", "--input", str(seq)],
        "heatmap": ["heatmap", "--config", str(config)],
    }
    ok = True
    details = []
    for name, argv in invocations.items():
        snapshots = []
        for attempt in ("x", "y"):
            out = tmp_path / f"{name}_{attempt}"
            code = main(argv + ["--out", str(out)])
            assert code == 0, f"{name} exited {code}"
            snapshots.append(
                {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file()}
            )
        identical = snapshots[0] == snapshots[1]
        ok &= identical
        details.append(f"{name}:{'=' if identical else '!'}")
    elapsed = time.perf_counter() - start
    _report(8, ok, f"byte-identical reruns ({', '.join(details)}), {elapsed:.0f}s")
